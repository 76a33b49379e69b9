#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "resblock/model.hpp"
#include "resblock/types.hpp"

namespace resblock {

/// Per-block-pair dyad counts and edge proportions for a fixed partition.
struct BlockProportions {
  int k = 1;
  Eigen::MatrixXi counts;        // n_ab, symmetric
  Matrix phat;                   // sample proportions, 0 where n_ab = 0
  std::optional<Matrix> pbar;    // mean model probabilities when supplied
};

/// Inputs of the uniform confidence bound.
struct BoundSpec {
  int n = 0;
  int k = 1;
  double delta = 0.05;
  int bonferroni_m = 1;

  void validate() const {
    if (n < 1 || k < 1) throw std::invalid_argument("confidence: need N >= 1 and K >= 1");
    if (!(delta > 0.0 && delta < 1.0)) {
      throw std::invalid_argument("confidence: delta must lie in (0,1)");
    }
    if (bonferroni_m < 1) throw std::invalid_argument("confidence: bonferroni_m must be >= 1");
  }
};

/// Kullback-Leibler divergence between Bernoulli(p) and Bernoulli(q).
///
/// q must be strictly interior unless p == q exactly (zero trials at the
/// boundary); p may touch the boundary with the 0*log(0) = 0 convention.
template <typename Scalar>
Scalar bernoulli_kl(Scalar p, Scalar q) {
  if (!(p >= Scalar(0) && p <= Scalar(1))) {
    throw std::domain_error("confidence: bernoulli_kl needs p in [0,1]");
  }
  if (q <= Scalar(0) || q >= Scalar(1)) {
    if (p == q) return Scalar(0);
    throw std::domain_error("confidence: bernoulli_kl reference at boundary gives infinite divergence");
  }
  Scalar out = Scalar(0);
  if (p > Scalar(0)) out += p * std::log(p / q);
  if (p < Scalar(1)) out += (Scalar(1) - p) * std::log((Scalar(1) - p) / (Scalar(1) - q));
  return out;
}

/// Counts n_ab and sample proportions for partition z; mean model
/// probabilities per block pair when p is supplied.
BlockProportions block_proportions(const IntVector& z, int k, const Sociomatrix& a,
                                   const EdgeProbabilities* p = nullptr);

/// Weighted divergence sum over block pairs: sum_{a<=b} n_ab * D(phat || ref).
/// Pairs with n_ab = 0 contribute exactly zero.
double divergence_statistic(const BlockProportions& bp, const Matrix& reference);

/// Upper confidence limit N log K + (K^2+K) log(N/K + 1) + log(m/delta),
/// holding uniformly over all K^N partitions with probability 1 - delta/m.
double uniform_bound(const BoundSpec& spec);

/// Divergence statistic rescaled by the dyad count C(N,2).
double normalized_divergence(double stat, int n_nodes);

}  // namespace resblock
