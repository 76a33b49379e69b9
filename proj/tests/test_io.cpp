#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "resblock/io_json.hpp"

using namespace resblock;

TEST_CASE("model params round-trip through JSON") {
  ModelParams p = ModelParams::zero(2, 3, 2);
  p.z << 1, 2, 1;
  p.theta << 0.5, -0.25, -0.25, 0.75;
  p.alpha << 0.1, -0.3, 0.2;
  p.beta << -1.5, 0.4;
  p.column_names = {"intercept", "same_gender"};

  const Json j = params_to_json(p);
  const ModelParams q = params_from_json(j);
  CHECK(q.k == p.k);
  CHECK((q.z.array() == p.z.array()).all());
  CHECK(q.theta == p.theta);
  CHECK(q.alpha == p.alpha);
  CHECK(q.beta == p.beta);
  CHECK(q.column_names == p.column_names);
}

TEST_CASE("fit results omit pinned node effects and round-trip") {
  FitResult f;
  f.params = ModelParams::zero(1, 4, 2);
  f.params.beta << -2.0, 0.5;
  f.params.column_names = {"intercept", "same_gender"};
  f.best_loglik = -3.25;
  f.trajectory = {-3.25};
  f.config.k = 1;
  f.config.restriction = Restriction::kNoAlpha;
  f.config.seed = 42;

  const Json j = fit_result_to_json(f);
  CHECK_FALSE(j.at("params").contains("alpha"));
  CHECK(j.at("params").at("theta").size() == 1);

  const FitResult g = fit_result_from_json(j);
  CHECK(g.best_loglik == f.best_loglik);
  CHECK(g.params.beta == f.params.beta);
  CHECK(g.params.alpha.size() == 4);
  CHECK(g.params.alpha.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.config.seed == 42);

  // alpha serialized when the restriction leaves it free
  FitResult fb = f;
  fb.config.restriction = Restriction::kBaseline;
  CHECK(fit_result_to_json(fb).at("params").contains("alpha"));
}

TEST_CASE("file digest is content-deterministic") {
  const std::string path = "resblock_digest_test.tmp";
  {
    std::ofstream out(path, std::ios::binary);
    out << "hello network\n";
  }
  const std::string d1 = file_digest(path);
  const std::string d2 = file_digest(path);
  CHECK(d1 == d2);
  CHECK(d1.size() == 16);
  {
    std::ofstream out(path, std::ios::binary);
    out << "hello networks\n";
  }
  CHECK(file_digest(path) != d1);
  std::remove(path.c_str());
}

TEST_CASE("manifest serialization carries the provenance fields") {
  RunManifest m;
  m.command = "bound";
  m.config = Json{{"n", 204}};
  m.seed = 7;
  m.tool_version = "0.1.0";
  m.timestamp = "2026-01-01T00:00:00Z";
  const Json j = manifest_to_json(m);
  CHECK(j.at("command") == "bound");
  CHECK(j.at("config").at("n") == 204);
  CHECK(j.at("seed") == 7);
  CHECK(j.at("tool_version") == "0.1.0");
  CHECK(j.contains("timestamp"));
  CHECK(j.contains("input_digests"));
}
