#pragma once

#include <string>
#include <vector>

#include "resblock/types.hpp"

namespace resblock {

/// Full parameterization of the network log-odds model: a K-class blockmodel
/// matrix, node effects constrained to sum to zero, and dyad-covariate
/// regression coefficients.
struct ModelParams {
  int k = 1;
  IntVector z;      // per-node class labels in {1..K}
  Matrix theta;     // symmetric K x K
  Vector alpha;     // length N, sum-zero
  Vector beta;      // aligned with DyadCovariates columns
  std::vector<std::string> column_names;

  int n_nodes() const { return static_cast<int>(z.size()); }
  void validate() const;

  static ModelParams zero(int k, int n_nodes, int n_covariates);
};

/// Per-dyad Bernoulli success probabilities in canonical dyad order. Every
/// entry lies strictly inside (0,1).
struct EdgeProbabilities {
  Vector p;
  void validate() const;
};

/// Dyad success probabilities P_ij = logistic(theta_{z_i z_j} + alpha_i +
/// alpha_j + x(i,j)'beta).
EdgeProbabilities log_odds(const ModelParams& params, const DyadCovariates& x);

/// Bernoulli product log-likelihood over dyads; always <= 0.
double log_likelihood(const Sociomatrix& a, const EdgeProbabilities& p);

/// Same likelihood evaluated directly from the parameterization, using the
/// stable a*eta - log(1+exp(eta)) form.
double conditional_log_likelihood(const ModelParams& params, const Sociomatrix& a,
                                  const DyadCovariates& x);

/// Full-conditional distribution of node i's class given all other labels,
/// normalized with log-sum-exp stabilization.
Vector conditional_z_distribution(int i, const ModelParams& params, const Sociomatrix& a,
                                  const DyadCovariates& x);

/// Shift the mean of theta into the intercept coefficient, leaving the
/// likelihood unchanged. No-op when the design has no intercept column.
ModelParams center_theta(const ModelParams& params);

}  // namespace resblock
