#include "resblock/io_json.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace resblock {

namespace {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.size();
  const auto cols = rows == 0 ? 0 : j.at(0).size();
  Matrix m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

Json int_matrix_to_json(const Eigen::MatrixXi& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename V>
Json vector_to_json(const V& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

Json manifest_to_json(const RunManifest& m) {
  return Json{{"command", m.command},
              {"config", m.config},
              {"seed", m.seed},
              {"input_digests", m.input_digests},
              {"tool_version", m.tool_version},
              {"timestamp", m.timestamp}};
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cli: cannot open input file " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string(hex);
}

Json params_to_json(const ModelParams& params) {
  Json j{{"k", params.k},
         {"z", vector_to_json(params.z)},
         {"theta", matrix_to_json(params.theta)},
         {"alpha", vector_to_json(params.alpha)},
         {"beta", vector_to_json(params.beta)},
         {"column_names", params.column_names}};
  return j;
}

ModelParams params_from_json(const Json& j) {
  ModelParams p;
  p.k = j.at("k").get<int>();
  const auto zv = j.at("z").get<std::vector<int>>();
  p.z = Eigen::Map<const IntVector>(zv.data(), static_cast<Eigen::Index>(zv.size()));
  p.theta = matrix_from_json(j.at("theta"));
  const auto bv = j.at("beta").get<std::vector<double>>();
  p.beta = Eigen::Map<const Vector>(bv.data(), static_cast<Eigen::Index>(bv.size()));
  if (j.contains("alpha")) {
    const auto av = j.at("alpha").get<std::vector<double>>();
    p.alpha = Eigen::Map<const Vector>(av.data(), static_cast<Eigen::Index>(av.size()));
  } else {
    p.alpha = Vector::Zero(p.z.size());
  }
  if (j.contains("column_names")) {
    p.column_names = j.at("column_names").get<std::vector<std::string>>();
  }
  p.validate();
  return p;
}

Json fit_config_to_json(const FitConfig& cfg) {
  return Json{{"k", cfg.k},
              {"model", restriction_name(cfg.restriction)},
              {"em_iters", cfg.max_em_iters},
              {"sweeps", cfg.gibbs_sweeps_per_estep},
              {"newton_tol", cfg.newton_tol},
              {"newton_max_iters", cfg.newton_max_iters},
              {"ridge", cfg.resolved_ridge()},
              {"restarts", cfg.n_restarts},
              {"seed", cfg.seed}};
}

Json fit_result_to_json(const FitResult& fit) {
  Json params = params_to_json(fit.params);
  // Pinned blocks are omitted rather than echoed as zeros.
  const auto mask = parameter_mask(fit.config.restriction, fit.config.k);
  if (!mask.alpha) params.erase("alpha");
  return Json{{"params", std::move(params)},
              {"best_loglik", fit.best_loglik},
              {"trajectory", fit.trajectory},
              {"degenerate", fit.degenerate},
              {"provenance", fit_config_to_json(fit.config)},
              {"best_restart", fit.best_restart}};
}

FitResult fit_result_from_json(const Json& j) {
  FitResult fit;
  Json pj = j.at("params");
  if (!pj.contains("alpha")) {
    const auto zv = pj.at("z").get<std::vector<int>>();
    pj["alpha"] = std::vector<double>(zv.size(), 0.0);
  }
  fit.params = params_from_json(pj);
  fit.best_loglik = j.at("best_loglik").get<double>();
  fit.trajectory = j.at("trajectory").get<std::vector<double>>();
  fit.degenerate = j.at("degenerate").get<bool>();
  if (j.contains("provenance")) {
    const Json& prov = j.at("provenance");
    fit.config.k = prov.at("k").get<int>();
    fit.config.restriction = restriction_from_name(prov.at("model").get<std::string>());
    fit.config.max_em_iters = prov.at("em_iters").get<int>();
    fit.config.gibbs_sweeps_per_estep = prov.at("sweeps").get<int>();
    fit.config.newton_tol = prov.at("newton_tol").get<double>();
    fit.config.newton_max_iters = prov.at("newton_max_iters").get<int>();
    fit.config.ridge = prov.at("ridge").get<double>();
    fit.config.n_restarts = prov.at("restarts").get<int>();
    fit.config.seed = prov.at("seed").get<std::uint64_t>();
  }
  return fit;
}

Json assessment_to_json(const AssessmentReport& report) {
  return Json{{"k", report.k},
              {"normalized_divergence", report.normalized_divergence},
              {"normalized_bound", report.normalized_bound},
              {"exceeds_bound", report.exceeds_bound},
              {"jaccard", report.jaccard},
              {"variance_ratio", report.variance_ratio},
              {"crosstab", int_matrix_to_json(report.crosstab)},
              {"crosstab_levels", report.crosstab_levels},
              {"partition", vector_to_json(report.partition)},
              {"baseline_ref", report.baseline_ref}};
}

Json bias_study_to_json(const BiasStudyResult& study) {
  Json rows = Json::array();
  for (const auto& row : study.rows) {
    rows.push_back(Json{{"restriction", row.restriction},
                        {"bias", row.bias},
                        {"mc_se", row.mc_se},
                        {"n_used", row.n_used},
                        {"n_degenerate", row.n_degenerate}});
  }
  return Json{{"components", study.components}, {"rows", std::move(rows)}};
}

Json slack_study_to_json(const SlackStudyResult& study) {
  Json ratios = Json::array();
  for (const auto& r : study.ratios) {
    ratios.push_back(Json{
        {"replicate", r.replicate}, {"k", r.k}, {"ratio", r.ratio}, {"degenerate", r.degenerate}});
  }
  return Json{{"ratios", std::move(ratios)},
              {"max_ratio", study.max_ratio},
              {"p50", study.p50},
              {"p95", study.p95},
              {"bin_edges", study.bin_edges},
              {"bin_counts", study.bin_counts}};
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cli: cannot write output file " + path);
  out << body;
}

}  // namespace resblock
