#include "resblock/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "resblock/math.hpp"
#include "resblock/parallel.hpp"

namespace resblock {

namespace {

constexpr double kSeparationLogOdds = 30.0;

// Flat index of theta cell (a,b), a <= b, in the upper-triangle layout.
inline int theta_flat(int a, int b, int k) { return a * (2 * k - a - 1) / 2 + b; }

struct FreeLayout {
  ParameterMask mask;
  int k = 1;
  int n = 0;
  int p = 0;
  int n_theta = 0;  // K(K+1)/2 when free
  int n_alpha_red = 0;
  int reduced_dim = 0;
};

FreeLayout make_layout(const ParameterMask& mask, int k, int n, int p) {
  FreeLayout lay;
  lay.mask = mask;
  lay.k = k;
  lay.n = n;
  lay.p = p;
  lay.n_theta = mask.theta ? k * (k + 1) / 2 : 0;
  lay.n_alpha_red = mask.alpha ? n - 1 : 0;
  lay.reduced_dim = lay.n_theta + lay.n_alpha_red + (mask.beta ? p : 0);
  return lay;
}

// Working copy of the free parameter blocks.
struct WorkParams {
  Matrix theta;  // K x K symmetric
  Vector alpha;  // length N, sum-zero
  Vector beta;   // length p
};

Vector compute_eta(const WorkParams& w, const IntVector& z, const DyadCovariates& x,
                   const FreeLayout& lay) {
  Vector eta = lay.mask.beta ? Vector(x.values * w.beta) : Vector::Zero(x.n_dyads());
  if (lay.mask.theta || lay.mask.alpha) {
    for_each_dyad(lay.n, [&](int i, int j, long d) {
      double add = 0.0;
      if (lay.mask.theta) add += w.theta(z[i] - 1, z[j] - 1);
      if (lay.mask.alpha) add += w.alpha[i] + w.alpha[j];
      eta[d] += add;
    });
  }
  return eta;
}

double penalty(const WorkParams& w, const FreeLayout& lay, double ridge) {
  if (ridge == 0.0) return 0.0;
  double ss = 0.0;
  if (lay.mask.theta) {
    for (int a = 0; a < lay.k; ++a) {
      for (int b = a; b < lay.k; ++b) ss += w.theta(a, b) * w.theta(a, b);
    }
  }
  if (lay.mask.alpha) ss += w.alpha.squaredNorm();
  if (lay.mask.beta) ss += w.beta.squaredNorm();
  return 0.5 * ridge * ss;
}

double objective(const Sociomatrix& a, const Vector& eta, const WorkParams& w,
                 const FreeLayout& lay, double ridge) {
  double ll = 0.0;
  for_each_dyad(lay.n, [&](int i, int j, long d) {
    ll += (a.adjacency(i, j) ? eta[d] : 0.0) - log1pexp(eta[d]);
  });
  return ll - penalty(w, lay, ridge);
}

// Gradient and negative Hessian of the penalized conditional log-likelihood,
// already reduced to the free coordinates (alpha through its N-1 free
// components with alpha_N = -sum of the rest).
void assemble(const Sociomatrix& a, const DyadCovariates& x, const IntVector& z,
              const WorkParams& w, const Vector& eta, const FreeLayout& lay, double ridge,
              Vector& g_red, Matrix& m_red) {
  const int k = lay.k, n = lay.n, p = lay.p;
  const int nt = lay.n_theta;

  Vector g_theta = Vector::Zero(nt);
  Vector g_alpha = Vector::Zero(lay.mask.alpha ? n : 0);
  Vector g_beta = Vector::Zero(lay.mask.beta ? p : 0);

  Vector m_tt = Vector::Zero(nt);  // theta block of -H is diagonal
  Matrix m_ta = Matrix::Zero(nt, lay.mask.alpha ? n : 0);
  Matrix m_tb = Matrix::Zero(nt, lay.mask.beta ? p : 0);
  Matrix m_aa = Matrix::Zero(lay.mask.alpha ? n : 0, lay.mask.alpha ? n : 0);
  Matrix m_ab = Matrix::Zero(lay.mask.alpha ? n : 0, lay.mask.beta ? p : 0);
  Matrix m_bb = Matrix::Zero(lay.mask.beta ? p : 0, lay.mask.beta ? p : 0);

  for_each_dyad(n, [&](int i, int j, long d) {
    const double prob = logistic(eta[d]);
    const double r = static_cast<double>(a.adjacency(i, j)) - prob;
    const double wgt = prob * (1.0 - prob);
    const int t = lay.mask.theta ? theta_flat(std::min(z[i], z[j]) - 1,
                                              std::max(z[i], z[j]) - 1, k)
                                 : -1;
    if (lay.mask.theta) {
      g_theta[t] += r;
      m_tt[t] += wgt;
    }
    if (lay.mask.alpha) {
      g_alpha[i] += r;
      g_alpha[j] += r;
      m_aa(i, i) += wgt;
      m_aa(j, j) += wgt;
      m_aa(i, j) += wgt;
      m_aa(j, i) += wgt;
      if (lay.mask.theta) {
        m_ta(t, i) += wgt;
        m_ta(t, j) += wgt;
      }
    }
    if (lay.mask.beta) {
      const auto xrow = x.values.row(d);
      g_beta.noalias() += r * xrow.transpose();
      if (lay.mask.theta) m_tb.row(t).noalias() += wgt * xrow;
      if (lay.mask.alpha) {
        m_ab.row(i).noalias() += wgt * xrow;
        m_ab.row(j).noalias() += wgt * xrow;
      }
      for (int u = 0; u < p; ++u) {
        const double xu = xrow[u] * wgt;
        if (xu == 0.0) continue;
        for (int v = u; v < p; ++v) m_bb(u, v) += xu * xrow[v];
      }
    }
  });
  if (lay.mask.beta) {
    m_bb.triangularView<Eigen::StrictlyLower>() = m_bb.transpose();
  }

  // Ridge enters in full coordinates so the alpha penalty stays symmetric in
  // the nodes after reduction.
  if (ridge > 0.0) {
    if (lay.mask.theta) {
      for (int a_ = 0; a_ < k; ++a_) {
        for (int b_ = a_; b_ < k; ++b_) {
          const int t = theta_flat(a_, b_, k);
          g_theta[t] -= ridge * w.theta(a_, b_);
          m_tt[t] += ridge;
        }
      }
    }
    if (lay.mask.alpha) {
      g_alpha -= ridge * w.alpha;
      m_aa.diagonal().array() += ridge;
    }
    if (lay.mask.beta) {
      g_beta -= ridge * w.beta;
      m_bb.diagonal().array() += ridge;
    }
  }

  // Reduce alpha to its first N-1 coordinates.
  const int na = lay.n_alpha_red;
  g_red.resize(lay.reduced_dim);
  m_red = Matrix::Zero(lay.reduced_dim, lay.reduced_dim);

  int off_a = nt;
  int off_b = nt + na;

  if (lay.mask.theta) {
    g_red.head(nt) = g_theta;
    m_red.topLeftCorner(nt, nt).diagonal() = m_tt;
  }
  if (lay.mask.alpha) {
    const int last = n - 1;
    g_red.segment(off_a, na) = g_alpha.head(na).array() - g_alpha[last];
    Matrix aa = m_aa.topLeftCorner(na, na);
    aa.rowwise() -= m_aa.row(last).head(na);
    aa.colwise() -= m_aa.col(last).head(na);
    aa.array() += m_aa(last, last);
    m_red.block(off_a, off_a, na, na) = aa;
    if (lay.mask.theta) {
      Matrix ta = m_ta.leftCols(na);
      ta.colwise() -= m_ta.col(last);
      m_red.block(0, off_a, nt, na) = ta;
      m_red.block(off_a, 0, na, nt) = ta.transpose();
    }
    if (lay.mask.beta) {
      Matrix ab = m_ab.topRows(na);
      ab.rowwise() -= m_ab.row(last);
      m_red.block(off_a, off_b, na, p) = ab;
      m_red.block(off_b, off_a, p, na) = ab.transpose();
    }
  }
  if (lay.mask.beta) {
    g_red.tail(p) = g_beta;
    m_red.bottomRightCorner(p, p) = m_bb;
    if (lay.mask.theta) {
      m_red.block(0, off_b, nt, p) = m_tb;
      m_red.block(off_b, 0, p, nt) = m_tb.transpose();
    }
  }
}

WorkParams apply_step(const WorkParams& base, const Vector& delta, double scale,
                      const FreeLayout& lay) {
  WorkParams out = base;
  int off = 0;
  if (lay.mask.theta) {
    for (int a = 0; a < lay.k; ++a) {
      for (int b = a; b < lay.k; ++b) {
        const double v = base.theta(a, b) + scale * delta[off + theta_flat(a, b, lay.k)];
        out.theta(a, b) = v;
        out.theta(b, a) = v;
      }
    }
    off += lay.n_theta;
  }
  if (lay.mask.alpha) {
    out.alpha.head(lay.n - 1) += scale * delta.segment(off, lay.n_alpha_red);
    out.alpha[lay.n - 1] = -out.alpha.head(lay.n - 1).sum();
    off += lay.n_alpha_red;
  }
  if (lay.mask.beta) {
    out.beta += scale * delta.tail(lay.p);
  }
  return out;
}

void check_design_rank(const DyadCovariates& x) {
  Eigen::ColPivHouseholderQR<Matrix> qr(x.values);
  const int rank = static_cast<int>(qr.rank());
  const int p = x.n_columns();
  if (rank >= p) return;
  // The pivot order puts independent columns first; the remainder are the
  // dependent ones.
  const auto perm = qr.colsPermutation().indices();
  std::vector<std::string> bad;
  for (int c = rank; c < p; ++c) bad.push_back(x.columns[perm[c]]);
  std::sort(bad.begin(), bad.end());
  std::ostringstream msg;
  msg << "inference: design rank-deficient with ridge = 0; dependent columns:";
  for (const auto& name : bad) msg << " " << name;
  throw std::runtime_error(msg.str());
}

}  // namespace

std::string restriction_name(Restriction r) {
  switch (r) {
    case Restriction::kFull: return "full";
    case Restriction::kBaseline: return "baseline";
    case Restriction::kPureBlockmodel: return "pure-sbm";
    case Restriction::kNoAlpha: return "no-alpha";
  }
  return "full";
}

Restriction restriction_from_name(const std::string& name) {
  if (name == "full") return Restriction::kFull;
  if (name == "baseline") return Restriction::kBaseline;
  if (name == "pure-sbm" || name == "pure_blockmodel") return Restriction::kPureBlockmodel;
  if (name == "no-alpha" || name == "no_alpha") return Restriction::kNoAlpha;
  throw std::invalid_argument("inference: unknown model restriction '" + name + "'");
}

ParameterMask parameter_mask(Restriction r, int k) {
  switch (r) {
    case Restriction::kFull: return {k > 1, true, true};
    case Restriction::kBaseline: return {false, true, true};
    case Restriction::kPureBlockmodel: return {true, false, false};
    case Restriction::kNoAlpha: return {k > 1, false, true};
  }
  return {};
}

void FitConfig::validate() const {
  if (k < 1) throw std::invalid_argument("inference: K must be >= 1");
  if (max_em_iters < 1 || gibbs_sweeps_per_estep < 1 || n_restarts < 1 || newton_max_iters < 1) {
    throw std::invalid_argument("inference: iteration counts must be positive");
  }
  if (!(newton_tol > 0.0)) throw std::invalid_argument("inference: newton_tol must be > 0");
  if (ridge && *ridge < 0.0) throw std::invalid_argument("inference: ridge must be >= 0");
}

double FitConfig::resolved_ridge() const {
  if (ridge) return *ridge;
  switch (restriction) {
    case Restriction::kBaseline:
      return 0.0;  // kept pure so standard logistic asymptotics apply
    case Restriction::kNoAlpha:
      return k > 1 ? 1e-8 : 0.0;
    default:
      return 1e-8;
  }
}

int FitConfig::effective_k() const { return restriction == Restriction::kBaseline ? 1 : k; }

MStepResult m_step(const IntVector& z, int k, const Sociomatrix& a, const DyadCovariates& x,
                   const MStepOptions& opts, const ModelParams* warm_start) {
  const int n = a.n_nodes();
  if (x.n_nodes != n) throw std::invalid_argument("inference: network/covariate size mismatch");
  if (z.size() != n) throw std::invalid_argument("inference: partition length must equal N");
  if (opts.ridge < 0.0) throw std::invalid_argument("inference: ridge must be >= 0");
  const int p = x.n_columns();
  const auto mask = parameter_mask(opts.restriction, k);
  const FreeLayout lay = make_layout(mask, k, n, p);

  if (opts.ridge == 0.0 && mask.beta) check_design_rank(x);

  WorkParams w;
  w.theta = Matrix::Zero(k, k);
  w.alpha = Vector::Zero(n);
  w.beta = Vector::Zero(p);
  if (warm_start) {
    if (mask.theta && warm_start->theta.rows() == k) w.theta = warm_start->theta;
    if (mask.alpha && warm_start->alpha.size() == n) w.alpha = warm_start->alpha;
    if (mask.beta && warm_start->beta.size() == p) w.beta = warm_start->beta;
  }

  MStepResult res;
  Vector eta = compute_eta(w, z, x, lay);
  double obj = objective(a, eta, w, lay, opts.ridge);
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  Vector g_red;
  Matrix m_red;
  int iter = 0;

  for (; iter < opts.max_iters; ++iter) {
    assemble(a, x, z, w, eta, lay, opts.ridge, g_red, m_red);
    grad_norm = g_red.norm();
    if (grad_norm < opts.tol) break;

    Eigen::LDLT<Matrix> ldlt(m_red);
    Vector delta = ldlt.solve(g_red);
    if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
      if (opts.ridge == 0.0) {
        throw std::runtime_error(
            "inference: design rank-deficient with ridge = 0 (blockmodel cells are collinear "
            "with the design); add a ridge or drop a column");
      }
      throw std::runtime_error("inference: Newton system could not be solved");
    }

    // Linearized change of the log-odds lets the line search run in O(dyads).
    Vector deta = lay.mask.beta ? Vector(x.values * delta.tail(p)) : Vector::Zero(x.n_dyads());
    if (lay.mask.theta || lay.mask.alpha) {
      const int na = lay.n_alpha_red;
      const double neg = lay.mask.alpha ? -delta.segment(lay.n_theta, na).sum() : 0.0;
      for_each_dyad(n, [&](int i, int j, long d) {
        double add = 0.0;
        if (lay.mask.theta) {
          add += delta[theta_flat(std::min(z[i], z[j]) - 1, std::max(z[i], z[j]) - 1, k)];
        }
        if (lay.mask.alpha) {
          add += (i < n - 1 ? delta[lay.n_theta + i] : neg) +
                 (j < n - 1 ? delta[lay.n_theta + j] : neg);
        }
        deta[d] += add;
      });
    }

    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h < 30; ++h) {
      const WorkParams trial = apply_step(w, delta, scale, lay);
      const Vector trial_eta = eta + scale * deta;
      const double trial_obj = objective(a, trial_eta, trial, lay, opts.ridge);
      if (std::isfinite(trial_obj) && trial_obj > obj) {
        w = trial;
        eta = compute_eta(w, z, x, lay);
        obj = objective(a, eta, w, lay, opts.ridge);
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;  // no ascent direction left at this precision
  }

  res.theta = w.theta;
  res.alpha = w.alpha;
  res.beta = w.beta;
  res.grad_norm = grad_norm;
  res.iterations = iter;
  res.loglik = 0.0;
  double max_abs_eta = 0.0;
  for_each_dyad(n, [&](int i, int j, long d) {
    res.loglik += (a.adjacency(i, j) ? eta[d] : 0.0) - log1pexp(eta[d]);
    max_abs_eta = std::max(max_abs_eta, std::abs(eta[d]));
  });
  res.degenerate = max_abs_eta > kSeparationLogOdds;

  if (mask.beta && lay.reduced_dim > 0) {
    assemble(a, x, z, w, eta, lay, opts.ridge, g_red, m_red);
    Eigen::LDLT<Matrix> ldlt(m_red);
    Matrix rhs = Matrix::Zero(lay.reduced_dim, p);
    rhs.bottomRows(p).setIdentity();
    const Matrix cov = ldlt.solve(rhs);
    res.beta_se.resize(p);
    for (int c = 0; c < p; ++c) {
      const double v = cov(lay.reduced_dim - p + c, c);
      res.beta_se[c] = v > 0.0 ? std::sqrt(v) : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return res;
}

namespace {

// Sweep with the covariate-plus-node-effect part of the log-odds precomputed
// per dyad; it is constant while only z changes.
IntVector sweep_with_offsets(const Matrix& theta, int k, const Vector& offsets,
                             const Sociomatrix& a, IntVector z, RngStream& rng) {
  const int n = a.n_nodes();
  Vector logits(k);
  Vector probs(k);
  for (int i = 0; i < n; ++i) {
    logits.setZero();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const long d = i < j ? dyad_index(i, j, n) : dyad_index(j, i, n);
      const double base = offsets[d];
      const bool edge = a.adjacency(i, j) != 0;
      for (int c = 0; c < k; ++c) {
        const double eta = theta(c, z[j] - 1) + base;
        logits[c] += (edge ? eta : 0.0) - log1pexp(eta);
      }
    }
    const double lse = log_sum_exp(logits);
    probs = (logits.array() - lse).exp();
    z[i] = 1 + rng.categorical(probs);
  }
  return z;
}

Vector dyad_offsets(const ModelParams& params, const DyadCovariates& x) {
  Vector offsets = x.values * params.beta;
  for_each_dyad(x.n_nodes, [&](int i, int j, long d) {
    offsets[d] += params.alpha[i] + params.alpha[j];
  });
  return offsets;
}

}  // namespace

IntVector gibbs_sweep(const ModelParams& params, const Sociomatrix& a, const DyadCovariates& x,
                      RngStream& rng) {
  if (params.n_nodes() != a.n_nodes() || x.n_nodes != a.n_nodes()) {
    throw std::invalid_argument("inference: gibbs_sweep size mismatch");
  }
  return sweep_with_offsets(params.theta, params.k, dyad_offsets(params, x), a, params.z, rng);
}

FitResult fit(const Sociomatrix& a, const DyadCovariates& x, const FitConfig& cfg, int threads) {
  cfg.validate();
  const int n = a.n_nodes();
  if (x.n_nodes != n) throw std::invalid_argument("inference: network/covariate size mismatch");
  const int k = cfg.effective_k();
  const auto mask = parameter_mask(cfg.restriction, k);
  const double ridge = cfg.resolved_ridge();
  const MStepOptions mopts{cfg.restriction, ridge, cfg.newton_tol, cfg.newton_max_iters};

  Vector beta0 = Vector::Zero(x.n_columns());
  if (mask.beta) {
    const MStepOptions init_opts{Restriction::kNoAlpha, ridge, cfg.newton_tol,
                                 cfg.newton_max_iters};
    beta0 = m_step(IntVector::Ones(n), 1, a, x, init_opts).beta;
  }

  const bool z_free = k > 1 && mask.theta;
  const int restarts = z_free ? cfg.n_restarts : 1;

  struct RestartOutcome {
    ModelParams params;
    double loglik = -std::numeric_limits<double>::infinity();
    std::vector<double> trajectory;
    bool degenerate = false;
  };
  std::vector<RestartOutcome> outcomes(restarts);

  const RngStream master(cfg.seed);
  parallel_for(static_cast<std::size_t>(restarts), threads, [&](std::size_t r) {
    RngStream rs = master.substream(r);
    ModelParams cur = ModelParams::zero(k, n, x.n_columns());
    cur.column_names = x.columns;
    cur.beta = beta0;
    if (z_free) {
      for (int i = 0; i < n; ++i) cur.z[i] = 1 + rs.uniform_int(k);
    }

    RestartOutcome& out = outcomes[r];
    if (!z_free) {
      const auto m = m_step(cur.z, k, a, x, mopts, &cur);
      cur.theta = m.theta;
      cur.alpha = m.alpha;
      cur.beta = m.beta;
      out.params = cur;
      out.loglik = m.loglik;
      out.trajectory = {m.loglik};
      out.degenerate = m.degenerate;
      return;
    }

    for (int t = 0; t < cfg.max_em_iters; ++t) {
      const Vector offsets = dyad_offsets(cur, x);
      for (int s = 0; s < cfg.gibbs_sweeps_per_estep; ++s) {
        cur.z = sweep_with_offsets(cur.theta, k, offsets, a, cur.z, rs);
      }
      const auto m = m_step(cur.z, k, a, x, mopts, &cur);
      cur.theta = m.theta;
      cur.alpha = m.alpha;
      cur.beta = m.beta;
      out.trajectory.push_back(m.loglik);
      if (m.loglik > out.loglik) {
        out.loglik = m.loglik;
        out.params = cur;
        out.degenerate = m.degenerate;
      }
    }
  });

  int best = 0;
  for (int r = 1; r < restarts; ++r) {
    if (outcomes[r].loglik > outcomes[best].loglik) best = r;
  }

  FitResult res;
  res.config = cfg;
  res.config.k = k;
  res.config.ridge = ridge;

  ModelParams params = canonicalize(outcomes[best].params);
  if (mask.theta && mask.beta) params = center_theta(params);
  res.params = std::move(params);
  res.best_loglik = conditional_log_likelihood(res.params, a, x);
  res.trajectory = outcomes[best].trajectory;
  res.degenerate = outcomes[best].degenerate;
  res.best_restart = best;
  return res;
}

ModelParams canonicalize(const ModelParams& params) {
  const int k = params.k;
  const int n = params.n_nodes();
  std::vector<int> size(k, 0);
  std::vector<int> first(k, n);  // smallest member index, n if empty
  for (int i = 0; i < n; ++i) {
    const int c = params.z[i] - 1;
    ++size[c];
    first[c] = std::min(first[c], i);
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (size[a] != size[b]) return size[a] > size[b];
    return first[a] < first[b];
  });
  std::vector<int> relabel(k);  // old class -> new class (0-based)
  for (int c = 0; c < k; ++c) relabel[order[c]] = c;

  ModelParams out = params;
  for (int i = 0; i < n; ++i) out.z[i] = 1 + relabel[params.z[i] - 1];
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      out.theta(relabel[a], relabel[b]) = params.theta(a, b);
    }
  }
  return out;
}

}  // namespace resblock
