#include "resblock/model.hpp"

#include <cmath>
#include <stdexcept>

#include "resblock/math.hpp"

namespace resblock {

void ModelParams::validate() const {
  if (k < 1) throw std::invalid_argument("model: K must be >= 1");
  if (theta.rows() != k || theta.cols() != k) {
    throw std::invalid_argument("model: theta must be K x K");
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if (theta(a, b) != theta(b, a)) {
        throw std::invalid_argument("model: theta must be symmetric");
      }
    }
  }
  if (alpha.size() != z.size()) {
    throw std::invalid_argument("model: alpha length must match z length");
  }
  if (z.size() > 0 && std::abs(alpha.sum()) > 1e-8) {
    throw std::invalid_argument("model: alpha must sum to zero");
  }
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] < 1 || z[i] > k) {
      throw std::invalid_argument("model: z entries must lie in {1..K}");
    }
  }
}

ModelParams ModelParams::zero(int k, int n_nodes, int n_covariates) {
  ModelParams p;
  p.k = k;
  p.z = IntVector::Ones(n_nodes);
  p.theta = Matrix::Zero(k, k);
  p.alpha = Vector::Zero(n_nodes);
  p.beta = Vector::Zero(n_covariates);
  return p;
}

void EdgeProbabilities::validate() const {
  for (Eigen::Index d = 0; d < p.size(); ++d) {
    if (!(p[d] > 0.0 && p[d] < 1.0)) {
      throw std::domain_error("model: edge probabilities must lie strictly in (0,1)");
    }
  }
}

namespace {

void check_dims(const ModelParams& params, const DyadCovariates& x) {
  if (params.n_nodes() != x.n_nodes) {
    throw std::invalid_argument("model: params and covariates disagree on node count");
  }
  if (params.beta.size() != x.n_columns()) {
    throw std::invalid_argument("model: beta length must match covariate column count");
  }
}

}  // namespace

EdgeProbabilities log_odds(const ModelParams& params, const DyadCovariates& x) {
  check_dims(params, x);
  const Vector xb = x.values * params.beta;
  EdgeProbabilities out;
  out.p.resize(x.n_dyads());
  for_each_dyad(x.n_nodes, [&](int i, int j, long d) {
    const double eta =
        params.theta(params.z[i] - 1, params.z[j] - 1) + params.alpha[i] + params.alpha[j] + xb[d];
    out.p[d] = logistic(eta);
  });
  return out;
}

double log_likelihood(const Sociomatrix& a, const EdgeProbabilities& p) {
  const int n = a.n_nodes();
  if (p.p.size() != dyad_count(n)) {
    throw std::invalid_argument("model: probability vector length must equal C(N,2)");
  }
  p.validate();
  double ll = 0.0;
  for_each_dyad(n, [&](int i, int j, long d) {
    ll += a.adjacency(i, j) ? std::log(p.p[d]) : std::log1p(-p.p[d]);
  });
  return ll;
}

double conditional_log_likelihood(const ModelParams& params, const Sociomatrix& a,
                                  const DyadCovariates& x) {
  check_dims(params, x);
  const Vector xb = x.values * params.beta;
  double ll = 0.0;
  for_each_dyad(x.n_nodes, [&](int i, int j, long d) {
    const double eta =
        params.theta(params.z[i] - 1, params.z[j] - 1) + params.alpha[i] + params.alpha[j] + xb[d];
    ll += (a.adjacency(i, j) ? eta : 0.0) - log1pexp(eta);
  });
  return ll;
}

Vector conditional_z_distribution(int i, const ModelParams& params, const Sociomatrix& a,
                                  const DyadCovariates& x) {
  check_dims(params, x);
  const int n = x.n_nodes;
  if (i < 0 || i >= n) throw std::invalid_argument("model: node index out of range");
  const int k = params.k;
  if (k == 1) return Vector::Ones(1);

  Vector logits = Vector::Zero(k);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const long d = i < j ? dyad_index(i, j, n) : dyad_index(j, i, n);
    const double base = params.alpha[i] + params.alpha[j] + x.values.row(d).dot(params.beta);
    const double aij = a.adjacency(i, j);
    for (int c = 0; c < k; ++c) {
      const double eta = params.theta(c, params.z[j] - 1) + base;
      logits[c] += (aij != 0.0 ? eta : 0.0) - log1pexp(eta);
    }
  }
  const double lse = log_sum_exp(logits);
  return (logits.array() - lse).exp();
}

ModelParams center_theta(const ModelParams& params) {
  const int intercept = [&] {
    for (size_t c = 0; c < params.column_names.size(); ++c) {
      if (params.column_names[c] == "intercept") return static_cast<int>(c);
    }
    return -1;
  }();
  if (intercept < 0 || params.theta.size() == 0) return params;
  ModelParams out = params;
  const double mean = params.theta.mean();
  out.theta.array() -= mean;
  out.beta[intercept] += mean;
  return out;
}

}  // namespace resblock
