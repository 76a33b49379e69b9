#include "resblock/confidence.hpp"

#include <cmath>

namespace resblock {

BlockProportions block_proportions(const IntVector& z, int k, const Sociomatrix& a,
                                   const EdgeProbabilities* p) {
  const int n = a.n_nodes();
  if (z.size() != n) throw std::invalid_argument("confidence: partition length must equal N");
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] < 1 || z[i] > k) {
      throw std::invalid_argument("confidence: partition labels must lie in {1..K}");
    }
  }
  if (p && p->p.size() != dyad_count(n)) {
    throw std::invalid_argument("confidence: probability vector length must equal C(N,2)");
  }

  BlockProportions bp;
  bp.k = k;
  bp.counts = Eigen::MatrixXi::Zero(k, k);
  Matrix edge_sum = Matrix::Zero(k, k);
  Matrix prob_sum = Matrix::Zero(k, k);

  for_each_dyad(n, [&](int i, int j, long d) {
    int a_cls = z[i] - 1, b_cls = z[j] - 1;
    if (a_cls > b_cls) std::swap(a_cls, b_cls);
    bp.counts(a_cls, b_cls) += 1;
    edge_sum(a_cls, b_cls) += a.adjacency(i, j);
    if (p) prob_sum(a_cls, b_cls) += p->p[d];
  });

  bp.phat = Matrix::Zero(k, k);
  Matrix pbar = Matrix::Zero(k, k);
  for (int u = 0; u < k; ++u) {
    for (int v = u; v < k; ++v) {
      const int c = bp.counts(u, v);
      if (c > 0) {
        bp.phat(u, v) = edge_sum(u, v) / c;
        if (p) pbar(u, v) = prob_sum(u, v) / c;
      }
      bp.phat(v, u) = bp.phat(u, v);
      bp.counts(v, u) = bp.counts(u, v);
      if (p) pbar(v, u) = pbar(u, v);
    }
  }
  if (p) bp.pbar = std::move(pbar);
  return bp;
}

double divergence_statistic(const BlockProportions& bp, const Matrix& reference) {
  if (reference.rows() != bp.k || reference.cols() != bp.k) {
    throw std::invalid_argument("confidence: reference matrix must be K x K");
  }
  double stat = 0.0;
  for (int u = 0; u < bp.k; ++u) {
    for (int v = u; v < bp.k; ++v) {
      const int c = bp.counts(u, v);
      if (c == 0) continue;
      stat += c * bernoulli_kl(bp.phat(u, v), reference(u, v));
    }
  }
  return stat;
}

double uniform_bound(const BoundSpec& spec) {
  spec.validate();
  const double n = spec.n;
  const double k = spec.k;
  const double delta_eff = spec.delta / spec.bonferroni_m;
  return n * std::log(k) + (k * k + k) * std::log(n / k + 1.0) + std::log(1.0 / delta_eff);
}

double normalized_divergence(double stat, int n_nodes) {
  if (n_nodes < 2) throw std::invalid_argument("confidence: need N >= 2 to normalize");
  return stat / static_cast<double>(dyad_count(n_nodes));
}

}  // namespace resblock
