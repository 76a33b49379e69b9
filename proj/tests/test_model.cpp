#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "resblock/math.hpp"
#include "resblock/model.hpp"
#include "resblock/rng.hpp"

using namespace resblock;

namespace {

Sociomatrix graph_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  BinaryMatrix adj = BinaryMatrix::Zero(n, n);
  for (const auto& [i, j] : edges) adj(i, j) = adj(j, i) = 1;
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
  return Sociomatrix(adj, ids);
}

// Intercept-only design for n nodes.
DyadCovariates intercept_design(int n) {
  DyadCovariates x;
  x.n_nodes = n;
  x.columns = {"intercept"};
  x.values = Matrix::Ones(dyad_count(n), 1);
  return x;
}

DyadCovariates random_design(int n, int p, RngStream& rng) {
  DyadCovariates x;
  x.n_nodes = n;
  x.values.resize(dyad_count(n), p);
  for (int c = 0; c < p; ++c) {
    x.columns.push_back("c" + std::to_string(c));
    for (long d = 0; d < x.n_dyads(); ++d) {
      x.values(d, c) = c == 0 ? 1.0 : rng.uniform01() - 0.5;
    }
  }
  return x;
}

}  // namespace

TEST_CASE("log-odds evaluation matches the logistic map") {
  const int n = 2;
  DyadCovariates x;
  x.n_nodes = n;
  x.columns = {"intercept", "same_gender", "same_race", "grade_diff"};
  x.values.resize(1, 4);
  x.values << 1, 0, 0, 0;

  ModelParams params = ModelParams::zero(1, n, 4);
  params.beta << -2.6, 0.025, 0.9, -1.6;
  const EdgeProbabilities p = log_odds(params, x);
  CHECK(p.p[0] == doctest::Approx(0.06913842034334682).epsilon(1e-12));

  params.beta.setZero();
  CHECK(log_odds(params, x).p[0] == doctest::Approx(0.5));

  // opposite node effects cancel
  params.alpha << 1.0, -1.0;
  CHECK(log_odds(params, x).p[0] == doctest::Approx(0.5));
}

TEST_CASE("log-likelihood closed forms") {
  const int n = 4;
  const Sociomatrix a = graph_from_edges(n, {{0, 1}, {2, 3}});
  EdgeProbabilities half;
  half.p = Vector::Constant(dyad_count(n), 0.5);
  CHECK(log_likelihood(a, half) ==
        doctest::Approx(-static_cast<double>(dyad_count(n)) * std::log(2.0)).epsilon(1e-13));

  // single dyad, edge present with probability 0.9
  const Sociomatrix pair = graph_from_edges(2, {{0, 1}});
  EdgeProbabilities p9;
  p9.p = Vector::Constant(1, 0.9);
  CHECK(log_likelihood(pair, p9) == doctest::Approx(-0.10536051565782628).epsilon(1e-12));

  // near-perfect fit drives the likelihood to zero from below
  EdgeProbabilities nearly;
  nearly.p.resize(dyad_count(n));
  for_each_dyad(n, [&](int i, int j, long d) {
    nearly.p[d] = a.adjacency(i, j) ? 1.0 - 1e-12 : 1e-12;
  });
  const double ll = log_likelihood(a, nearly);
  CHECK(ll < 0.0);
  CHECK(ll > -1e-10);

  EdgeProbabilities bad;
  bad.p = Vector::Constant(dyad_count(n), 1.0);
  CHECK_THROWS_AS((void)log_likelihood(a, bad), std::domain_error);
}

TEST_CASE("log-likelihood agrees with the naive oracle on random inputs") {
  RngStream rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + rng.uniform_int(5);
    const Sociomatrix a = oracles::random_graph(n, 0.4, rng);
    EdgeProbabilities p;
    p.p.resize(dyad_count(n));
    for (long d = 0; d < p.p.size(); ++d) p.p[d] = 0.05 + 0.9 * rng.uniform01();
    CHECK(log_likelihood(a, p) ==
          doctest::Approx(oracles::naive_log_likelihood(a, p.p)).epsilon(1e-12));
  }
}

TEST_CASE("likelihood is invariant under class relabeling") {
  RngStream rng(5);
  const int n = 7, k = 3;
  const Sociomatrix a = oracles::random_graph(n, 0.3, rng);
  DyadCovariates x = random_design(n, 3, rng);

  ModelParams params = ModelParams::zero(k, n, 3);
  for (int i = 0; i < n; ++i) params.z[i] = 1 + rng.uniform_int(k);
  for (int u = 0; u < k; ++u) {
    for (int v = u; v < k; ++v) {
      params.theta(u, v) = params.theta(v, u) = rng.uniform01() - 0.5;
    }
  }
  params.beta << 0.2, -0.4, 0.1;

  const double base = conditional_log_likelihood(params, a, x);

  // relabel classes 1<->3
  ModelParams swapped = params;
  const std::vector<int> perm = {2, 1, 0};
  for (int i = 0; i < n; ++i) swapped.z[i] = perm[params.z[i] - 1] + 1;
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) swapped.theta(perm[u], perm[v]) = params.theta(u, v);
  }
  CHECK(conditional_log_likelihood(swapped, a, x) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("conditional likelihood is concave along parameter segments") {
  RngStream rng(9);
  const int n = 8;
  const Sociomatrix a = oracles::random_graph(n, 0.4, rng);
  DyadCovariates x = random_design(n, 2, rng);
  for (int rep = 0; rep < 20; ++rep) {
    ModelParams p1 = ModelParams::zero(1, n, 2);
    ModelParams p2 = ModelParams::zero(1, n, 2);
    for (int c = 0; c < 2; ++c) {
      p1.beta[c] = 2.0 * rng.uniform01() - 1.0;
      p2.beta[c] = 2.0 * rng.uniform01() - 1.0;
    }
    ModelParams mid = p1;
    mid.beta = 0.5 * (p1.beta + p2.beta);
    const double lm = conditional_log_likelihood(mid, a, x);
    const double avg = 0.5 * (conditional_log_likelihood(p1, a, x) +
                              conditional_log_likelihood(p2, a, x));
    CHECK(lm >= avg - 1e-12);
  }
}

TEST_CASE("conditional class distribution: trivial cases") {
  RngStream rng(13);
  const int n = 5;
  const Sociomatrix a = oracles::random_graph(n, 0.5, rng);
  DyadCovariates x = intercept_design(n);

  ModelParams k1 = ModelParams::zero(1, n, 1);
  const Vector single = conditional_z_distribution(2, k1, a, x);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == doctest::Approx(1.0));

  ModelParams k3 = ModelParams::zero(3, n, 1);
  k3.beta[0] = -0.7;
  const Vector flat = conditional_z_distribution(0, k3, a, x);
  for (int c = 0; c < 3; ++c) CHECK(flat[c] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("conditional class distribution matches brute-force ratios") {
  RngStream rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 3 + rng.uniform_int(4);  // up to 6 nodes
    const int k = 2;
    const Sociomatrix a = oracles::random_graph(n, 0.5, rng);
    DyadCovariates x = random_design(n, 2, rng);

    ModelParams params = ModelParams::zero(k, n, 2);
    params.theta << 1.4, -0.9, -0.9, 1.1;
    params.beta << -0.3, 0.5;
    for (int i = 0; i < n; ++i) params.z[i] = 1 + rng.uniform_int(k);

    const int node = rng.uniform_int(n);
    const Vector dist = conditional_z_distribution(node, params, a, x);
    CHECK(dist.sum() == doctest::Approx(1.0).epsilon(1e-12));

    // brute force: full conditional likelihood for each choice of z_node
    Vector weights(k);
    for (int c = 0; c < k; ++c) {
      ModelParams probe = params;
      probe.z[node] = c + 1;
      weights[c] = std::exp(conditional_log_likelihood(probe, a, x));
    }
    weights /= weights.sum();
    for (int c = 0; c < k; ++c) {
      CHECK(dist[c] == doctest::Approx(weights[c]).epsilon(1e-10));
    }
  }
}

TEST_CASE("theta centering moves the mean into the intercept without changing fit") {
  RngStream rng(21);
  const int n = 6, k = 2;
  const Sociomatrix a = oracles::random_graph(n, 0.4, rng);
  DyadCovariates x = random_design(n, 3, rng);
  x.columns[0] = "intercept";

  ModelParams params = ModelParams::zero(k, n, 3);
  params.column_names = x.columns;
  params.theta << 0.8, -0.2, -0.2, 0.5;
  params.beta << -1.0, 0.3, 0.2;
  for (int i = 0; i < n; ++i) params.z[i] = 1 + rng.uniform_int(k);

  const ModelParams centered = center_theta(params);
  CHECK(centered.theta.mean() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(conditional_log_likelihood(centered, a, x) ==
        doctest::Approx(conditional_log_likelihood(params, a, x)).epsilon(1e-12));
}

TEST_CASE("params validation rejects broken invariants") {
  ModelParams p = ModelParams::zero(2, 3, 1);
  p.theta(0, 1) = 0.5;  // asymmetric
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.theta(1, 0) = 0.5;
  p.alpha << 1.0, 0.0, 0.0;  // sum not zero
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.alpha.setZero();
  p.z[0] = 5;  // out of range
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
