#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "resblock/netdata.hpp"
#include "resblock/rng.hpp"

using namespace resblock;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& body)
      : path("resblock_test_" + name) {
    std::ofstream out(path);
    out << body;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

NodeCovariates tiny_nodes() {
  NodeCovariates nodes;
  nodes.gender_levels = {"F", "M"};
  nodes.race_levels = {"A", "B"};
  nodes.gender = IntVector::Zero(2);
  nodes.race = IntVector(2);
  nodes.race << 0, 1;
  nodes.grade = IntVector(2);
  nodes.grade << 9, 11;
  return nodes;
}

}  // namespace

TEST_CASE("union and mutual symmetrization follow the nomination rules") {
  TempFile covs("covs.csv",
                "id,gender,race,grade\n"
                "a,F,A,9\n"
                "b,M,A,9\n"
                "c,F,B,10\n");
  TempFile edges("edges.txt",
                 "# nominations\n"
                 "a b\n"
                 "b a\n"
                 "a c\n"
                 "a a\n"   // self-nomination dropped
                 "a b\n"); // duplicate collapsed

  const auto [gu, nodes_u] = load_network(edges.path, covs.path, Symmetrization::kUnion);
  CHECK(gu.n_nodes() == 3);
  CHECK(gu.n_edges() == 2);
  CHECK(gu.adjacency(0, 1) == 1);
  CHECK(gu.adjacency(0, 2) == 1);
  CHECK(gu.adjacency(1, 2) == 0);

  const auto [gm, nodes_m] = load_network(edges.path, covs.path, Symmetrization::kMutual);
  CHECK(gm.n_edges() == 1);
  CHECK(gm.adjacency(0, 1) == 1);
  CHECK(gm.adjacency(0, 2) == 0);

  // union edges always contain the mutual ones
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(gu.adjacency(i, j) >= gm.adjacency(i, j));
    }
  }
  CHECK(nodes_u.grade[2] == 10);
  CHECK(nodes_u.gender_levels == std::vector<std::string>{"F", "M"});
}

TEST_CASE("loader errors: unknown id, malformed line, duplicate id, missing value") {
  TempFile covs("covs_err.csv", "id,gender,race,grade\na,F,A,9\nb,M,A,9\n");
  {
    TempFile edges("edges_unknown.txt", "a zz\n");
    CHECK_THROWS_WITH_AS((void)load_network(edges.path, covs.path, Symmetrization::kUnion),
                         doctest::Contains("unknown node id"), std::runtime_error);
  }
  {
    TempFile edges("edges_malformed.txt", "a b c\n");
    CHECK_THROWS_WITH_AS((void)load_network(edges.path, covs.path, Symmetrization::kUnion),
                         doctest::Contains("malformed"), std::runtime_error);
  }
  {
    TempFile dup("covs_dup.csv", "id,gender,race,grade\na,F,A,9\na,M,A,9\n");
    TempFile edges("edges_ok.txt", "");
    CHECK_THROWS_WITH_AS((void)load_network(edges.path, dup.path, Symmetrization::kUnion),
                         doctest::Contains("duplicate node id"), std::runtime_error);
  }
  {
    TempFile missing("covs_missing.csv", "id,gender,race,grade\na,F,,9\nb,M,A,9\n");
    TempFile edges("edges_ok2.txt", "");
    CHECK_THROWS_WITH_AS((void)load_network(edges.path, missing.path, Symmetrization::kUnion),
                         doctest::Contains("missing covariate"), std::runtime_error);
  }
}

TEST_CASE("a 69-node file with 220 undirected edges loads with the right counts") {
  std::string covs_body = "id,gender,race,grade\n";
  for (int i = 0; i < 69; ++i) {
    covs_body += "s" + std::to_string(i) + ",F,A," + std::to_string(7 + i % 6) + "\n";
  }
  // 220 distinct pairs listed one direction each
  std::string edge_body;
  RngStream rng(7);
  std::set<std::pair<int, int>> pairs;
  while (pairs.size() < 220) {
    int i = rng.uniform_int(69);
    int j = rng.uniform_int(69);
    if (i == j) continue;
    pairs.insert({std::min(i, j), std::max(i, j)});
  }
  for (const auto& [i, j] : pairs) {
    edge_body += "s" + std::to_string(i) + " s" + std::to_string(j) + "\n";
  }
  TempFile covs("covs69.csv", covs_body);
  TempFile edges("edges69.txt", edge_body);
  const auto [g, nodes] = load_network(edges.path, covs.path, Symmetrization::kUnion);
  CHECK(g.n_nodes() == 69);
  CHECK(g.n_edges() == 220);
}

TEST_CASE("basic dyad covariates match the hand examples") {
  NodeCovariates nodes = tiny_nodes();
  const DyadCovariates x = build_dyad_covariates(nodes, CovariateScheme::kBasic);
  CHECK(x.columns == std::vector<std::string>{"intercept", "same_gender", "same_race",
                                              "grade_diff"});
  REQUIRE(x.n_dyads() == 1);
  CHECK(x.values(0, 0) == 1.0);
  CHECK(x.values(0, 1) == 1.0);  // same gender
  CHECK(x.values(0, 2) == 0.0);  // different race
  CHECK(x.values(0, 3) == 2.0);  // grades 9 and 11

  // identical twins share everything
  nodes.race[1] = 0;
  nodes.grade[1] = 9;
  const DyadCovariates twins = build_dyad_covariates(nodes, CovariateScheme::kBasic);
  CHECK(twins.values.row(0) == Eigen::RowVector4d(1, 1, 1, 0));
}

TEST_CASE("expanded scheme only emits observed pairings") {
  NodeCovariates nodes;
  nodes.gender_levels = {"F"};
  nodes.race_levels = {"A"};
  nodes.gender = IntVector::Zero(3);
  nodes.race = IntVector::Zero(3);
  nodes.grade = IntVector(3);
  nodes.grade << 7, 7, 8;
  nodes.degree_bin = IntVector::Zero(3);

  const DyadCovariates x = build_dyad_covariates(nodes, CovariateScheme::kExpanded);
  int grade77 = x.column_index("grade_pair(7,7)");
  int grade78 = x.column_index("grade_pair(7,8)");
  CHECK(grade77 >= 0);
  CHECK(grade78 >= 0);
  CHECK(x.column_index("grade_pair(8,8)") == -1);  // unobserved
  bool noted = false;
  for (const auto& note : x.notes) {
    if (note.find("grade pairing (8,8)") != std::string::npos) noted = true;
  }
  CHECK(noted);

  // dyads: (0,1) grades 7,7; (0,2) and (1,2) grades 7,8
  CHECK(x.values(0, grade77) == 1.0);
  CHECK(x.values(1, grade78) == 1.0);
  CHECK(x.values(2, grade78) == 1.0);
}

TEST_CASE("dyad covariate row count is always C(N,2) with an all-ones intercept") {
  RngStream rng(11);
  for (int n : {2, 5, 9}) {
    NodeCovariates nodes;
    nodes.gender_levels = {"F", "M"};
    nodes.race_levels = {"A", "B", "C"};
    nodes.gender.resize(n);
    nodes.race.resize(n);
    nodes.grade.resize(n);
    for (int i = 0; i < n; ++i) {
      nodes.gender[i] = rng.uniform_int(2);
      nodes.race[i] = rng.uniform_int(3);
      nodes.grade[i] = 7 + rng.uniform_int(6);
    }
    const DyadCovariates x = build_dyad_covariates(nodes, CovariateScheme::kBasic);
    CHECK(x.n_dyads() == dyad_count(n));
    CHECK(x.values.col(0).minCoeff() == 1.0);
    CHECK(x.values.col(0).maxCoeff() == 1.0);
  }
}

TEST_CASE("degree bins follow the 0-3, 4-7, 8+ ranges") {
  // path-free construction: star around node 0 gives controllable degrees
  const int n = 21;
  BinaryMatrix adj = BinaryMatrix::Zero(n, n);
  for (int j = 1; j <= 20; ++j) adj(0, j) = adj(j, 0) = 1;
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  const Sociomatrix g(adj, ids);

  const IntVector bins = compute_degree_bins(g);
  CHECK(bins[0] == 2);  // degree 20
  for (int j = 1; j < n; ++j) CHECK(bins[j] == 0);  // degree 1

  CHECK_THROWS_AS((void)compute_degree_bins(g, {7, 3}), std::invalid_argument);

  // boundary degrees 0,3,4,7,8,20 -> bins 0,0,1,1,2,2 via explicit binning
  const std::vector<int> degrees = {0, 3, 4, 7, 8, 20};
  const std::vector<int> expected = {0, 0, 1, 1, 2, 2};
  for (size_t i = 0; i < degrees.size(); ++i) {
    int bin = 0;
    for (int c : {3, 7}) {
      if (c < degrees[i]) ++bin;
    }
    CHECK(bin == expected[i]);
  }
}

TEST_CASE("complete graph puts every node in the top bin") {
  const int n = 10;
  BinaryMatrix adj = BinaryMatrix::Ones(n, n);
  for (int i = 0; i < n; ++i) adj(i, i) = 0;
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  const Sociomatrix g(adj, ids);
  const IntVector bins = compute_degree_bins(g);
  CHECK(bins.minCoeff() == 2);
  CHECK(bins.maxCoeff() == 2);
}
