// Test-only reference implementations, kept deliberately naive and independent
// of the library's computation paths.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "resblock/rng.hpp"
#include "resblock/types.hpp"

namespace oracles {

using resblock::BinaryMatrix;
using resblock::IntVector;
using resblock::Matrix;
using resblock::Sociomatrix;
using resblock::Vector;

// Straight-from-the-definition Bernoulli product log-likelihood.
inline double naive_log_likelihood(const Sociomatrix& a, const Vector& p) {
  double ll = 0.0;
  long d = 0;
  const int n = a.n_nodes();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++d) {
      ll += a.adjacency(i, j) ? std::log(p[d]) : std::log(1.0 - p[d]);
    }
  }
  return ll;
}

struct NaiveBlocks {
  Matrix counts;
  Matrix edge_share;   // phat
  Matrix prob_share;   // pbar
};

// Dyad-counting block proportions.
inline NaiveBlocks naive_block_proportions(const IntVector& z, int k, const Sociomatrix& a,
                                           const Vector* p = nullptr) {
  NaiveBlocks out;
  out.counts = Matrix::Zero(k, k);
  out.edge_share = Matrix::Zero(k, k);
  out.prob_share = Matrix::Zero(k, k);
  Matrix edges = Matrix::Zero(k, k);
  Matrix probs = Matrix::Zero(k, k);
  const int n = a.n_nodes();
  long d = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++d) {
      const int u = std::min(z[i], z[j]) - 1;
      const int v = std::max(z[i], z[j]) - 1;
      out.counts(u, v) += 1.0;
      out.counts(v, u) = out.counts(u, v);
      edges(u, v) += a.adjacency(i, j);
      if (p) probs(u, v) += (*p)[d];
    }
  }
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      const double c = out.counts(std::min(u, v), std::max(u, v));
      if (c > 0) {
        out.edge_share(u, v) = edges(std::min(u, v), std::max(u, v)) / c;
        out.prob_share(u, v) = probs(std::min(u, v), std::max(u, v)) / c;
      }
    }
  }
  return out;
}

inline double naive_bernoulli_kl(double p, double q) {
  double out = 0.0;
  if (p > 0.0) out += p * std::log(p / q);
  if (p < 1.0) out += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return out;
}

inline double naive_divergence(const NaiveBlocks& blocks, const Matrix& reference) {
  double stat = 0.0;
  const int k = static_cast<int>(reference.rows());
  for (int u = 0; u < k; ++u) {
    for (int v = u; v < k; ++v) {
      if (blocks.counts(u, v) == 0) continue;
      stat += blocks.counts(u, v) * naive_bernoulli_kl(blocks.edge_share(u, v), reference(u, v));
    }
  }
  return stat;
}

// Visit every assignment in {1..k}^n.
inline void enumerate_partitions(int n, int k, const std::function<void(const IntVector&)>& body) {
  IntVector z = IntVector::Ones(n);
  for (;;) {
    body(z);
    int i = 0;
    while (i < n) {
      if (z[i] < k) {
        ++z[i];
        break;
      }
      z[i] = 1;
      ++i;
    }
    if (i == n) break;
  }
}

// Central finite differences of a scalar function.
inline Vector finite_difference_gradient(const std::function<double(const Vector&)>& f,
                                         const Vector& at, double h = 1e-5) {
  Vector g(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Vector hi = at, lo = at;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

// Random Erdos-Renyi-style graph for property tests.
inline Sociomatrix random_graph(int n, double density, resblock::RngStream& rng) {
  BinaryMatrix adj = BinaryMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      adj(i, j) = adj(j, i) = rng.bernoulli(density) ? 1 : 0;
    }
  }
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = "v" + std::to_string(i);
  return Sociomatrix(std::move(adj), std::move(ids));
}

// Best label agreement over all relabelings of up to 6 classes.
inline double best_agreement(const IntVector& z, const IntVector& truth, int k) {
  std::vector<int> perm(k);
  for (int i = 0; i < k; ++i) perm[i] = i;
  double best = 0.0;
  const int n = static_cast<int>(z.size());
  std::sort(perm.begin(), perm.end());
  do {
    int agree = 0;
    for (int i = 0; i < n; ++i) {
      if (perm[z[i] - 1] + 1 == truth[i]) ++agree;
    }
    best = std::max(best, static_cast<double>(agree) / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracles
