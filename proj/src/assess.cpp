#include "resblock/assess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "resblock/math.hpp"

namespace resblock {

namespace {

void check_baseline(const FitResult& baseline) {
  if (baseline.degenerate) {
    throw std::invalid_argument("assess: baseline fit is degenerate; nominal values undefined");
  }
  if (baseline.params.k != 1) {
    throw std::invalid_argument("assess: baseline fit must have K = 1");
  }
  if (baseline.params.theta.size() != 1 || baseline.params.theta(0, 0) != 0.0) {
    throw std::invalid_argument("assess: baseline fit must have theta = 0");
  }
}

double population_variance(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size());
}

}  // namespace

Matrix baseline_nominal(const IntVector& z, int k, const FitResult& baseline,
                        const DyadCovariates& x) {
  check_baseline(baseline);
  const int n = x.n_nodes;
  if (z.size() != n) throw std::invalid_argument("assess: partition length must equal N");
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] < 1 || z[i] > k) {
      throw std::invalid_argument("assess: partition labels must lie in {1..K}");
    }
  }
  const EdgeProbabilities p = log_odds(baseline.params, x);

  Matrix prob_sum = Matrix::Zero(k, k);
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(k, k);
  for_each_dyad(n, [&](int i, int j, long d) {
    int u = z[i] - 1, v = z[j] - 1;
    if (u > v) std::swap(u, v);
    prob_sum(u, v) += p.p[d];
    counts(u, v) += 1;
  });

  const double overall = p.p.mean();  // interior placeholder for empty pairs
  Matrix nominal(k, k);
  for (int u = 0; u < k; ++u) {
    for (int v = u; v < k; ++v) {
      nominal(u, v) = counts(u, v) > 0 ? prob_sum(u, v) / counts(u, v) : overall;
      nominal(v, u) = nominal(u, v);
    }
  }
  return nominal;
}

AssessmentReport assess_partition(const IntVector& z, const Sociomatrix& a,
                                  const DyadCovariates& x, const FitResult& baseline,
                                  const BoundSpec& spec, const NodeCovariates& nodes) {
  spec.validate();
  const int n = a.n_nodes();
  if (z.size() != n || nodes.n_nodes() != n || x.n_nodes != n) {
    throw std::invalid_argument("assess: input dimension mismatch");
  }
  if (spec.n != n) throw std::invalid_argument("assess: bound spec node count mismatch");
  if (z.maxCoeff() > spec.k) {
    throw std::invalid_argument("assess: partition uses more classes than the bound spec");
  }

  AssessmentReport report;
  report.k = spec.k;
  report.partition = z;
  report.baseline_ref = fit_fingerprint(baseline);

  const BlockProportions bp = block_proportions(z, spec.k, a);
  const Matrix nominal = baseline_nominal(z, spec.k, baseline, x);
  const double stat = divergence_statistic(bp, nominal);
  report.normalized_divergence = normalized_divergence(stat, n);
  report.normalized_bound = normalized_divergence(uniform_bound(spec), n);
  report.exceeds_bound = report.normalized_divergence >= report.normalized_bound;

  report.jaccard["gender"] = jaccard_alignment(z, nodes.gender);
  report.jaccard["race"] = jaccard_alignment(z, nodes.race);
  report.jaccard["grade"] = jaccard_alignment(z, nodes.grade);
  report.variance_ratio = degree_variance_ratio(z, a);

  std::set<int> grade_set(nodes.grade.data(), nodes.grade.data() + n);
  report.crosstab_levels.assign(grade_set.begin(), grade_set.end());
  IntVector grade_idx(n);
  for (int i = 0; i < n; ++i) {
    grade_idx[i] = static_cast<int>(
        std::lower_bound(report.crosstab_levels.begin(), report.crosstab_levels.end(),
                         nodes.grade[i]) -
        report.crosstab_levels.begin());
  }
  report.crosstab = crosstab(z, grade_idx, static_cast<int>(report.crosstab_levels.size()));
  return report;
}

double jaccard_alignment(const IntVector& z, const IntVector& labels) {
  const int n = static_cast<int>(z.size());
  if (labels.size() != n) throw std::invalid_argument("assess: label length mismatch");
  long both = 0, either = 0;
  for_each_dyad(n, [&](int i, int j, long) {
    const bool in_a = z[i] == z[j];
    const bool in_b = labels[i] == labels[j];
    both += in_a && in_b;
    either += in_a || in_b;
  });
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

double degree_variance_ratio(const IntVector& z, const Sociomatrix& a) {
  const int n = a.n_nodes();
  if (z.size() != n) throw std::invalid_argument("assess: partition length mismatch");
  const IntVector deg = a.degrees();
  std::vector<double> all(n);
  for (int i = 0; i < n; ++i) all[i] = deg[i];
  const double total = population_variance(all);
  if (total == 0.0) {
    throw std::domain_error("assess: degree variance ratio undefined for constant degrees");
  }
  const int k = z.maxCoeff();
  double sum = 0.0;
  int n_classes = 0;
  for (int c = 1; c <= k; ++c) {
    std::vector<double> within;
    for (int i = 0; i < n; ++i) {
      if (z[i] == c) within.push_back(deg[i]);
    }
    if (within.empty()) continue;
    sum += population_variance(within) / total;
    ++n_classes;
  }
  return sum / n_classes;
}

Eigen::MatrixXi crosstab(const IntVector& z, const IntVector& labels, int n_levels) {
  const int n = static_cast<int>(z.size());
  if (labels.size() != n) throw std::invalid_argument("assess: label length mismatch");
  const int k = n > 0 ? z.maxCoeff() : 1;
  Eigen::MatrixXi table = Eigen::MatrixXi::Zero(k, n_levels);
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= n_levels) {
      throw std::invalid_argument("assess: label index out of range");
    }
    table(z[i] - 1, labels[i]) += 1;
  }
  return table;
}

double alpha_degree_correlation(const FitResult& fit, const Sociomatrix& a) {
  const int n = a.n_nodes();
  if (fit.params.alpha.size() != n) {
    throw std::invalid_argument("assess: fit has no node effects for this network");
  }
  const IntVector deg = a.degrees();
  Vector degv(n);
  for (int i = 0; i < n; ++i) degv[i] = deg[i];
  return pearson_correlation(fit.params.alpha, degv);
}

DevianceResult analysis_of_deviance(const Sociomatrix& a, const DyadCovariates& x,
                                    const NodeCovariates& nodes, const std::string& withhold) {
  (void)nodes;
  std::vector<int> withheld;
  for (int c = 0; c < x.n_columns(); ++c) {
    const std::string& name = x.columns[c];
    if (name == withhold || name.rfind(withhold + "(", 0) == 0) withheld.push_back(c);
  }
  if (withheld.empty()) {
    throw std::invalid_argument("assess: withheld name '" + withhold + "' not in design");
  }
  if (static_cast<int>(withheld.size()) == x.n_columns()) {
    throw std::invalid_argument("assess: cannot withhold every design column");
  }

  DyadCovariates reduced;
  reduced.n_nodes = x.n_nodes;
  reduced.values.resize(x.n_dyads(), x.n_columns() - static_cast<int>(withheld.size()));
  int out_col = 0;
  for (int c = 0; c < x.n_columns(); ++c) {
    if (std::find(withheld.begin(), withheld.end(), c) != withheld.end()) continue;
    reduced.values.col(out_col) = x.values.col(c);
    reduced.columns.push_back(x.columns[c]);
    ++out_col;
  }

  // The chi-squared reference is only valid for the alpha = 0 logistic
  // restriction, so both fits are pinned to it here.
  const MStepOptions opts{Restriction::kNoAlpha, 0.0, 1e-10, 200};
  const IntVector ones = IntVector::Ones(a.n_nodes());
  const MStepResult full = m_step(ones, 1, a, x, opts);
  const MStepResult part = m_step(ones, 1, a, reduced, opts);

  DevianceResult res;
  res.df = static_cast<int>(withheld.size());
  for (int c : withheld) res.withheld_columns.push_back(x.columns[c]);
  res.deviance_change = 2.0 * (full.loglik - part.loglik);
  if (res.deviance_change < 0.0 && res.deviance_change > -1e-8) res.deviance_change = 0.0;
  res.p_value = chi_squared_sf(res.deviance_change, res.df);
  return res;
}

std::string fit_fingerprint(const FitResult& fit) {
  // FNV-1a over the defining numbers; enough to tie reports to a fit.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  const double ll = fit.best_loglik;
  mix(&ll, sizeof(ll));
  mix(&fit.params.k, sizeof(fit.params.k));
  for (Eigen::Index i = 0; i < fit.params.beta.size(); ++i) {
    const double b = fit.params.beta[i];
    mix(&b, sizeof(b));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace resblock
