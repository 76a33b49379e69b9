#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "resblock/assess.hpp"
#include "resblock/inference.hpp"
#include "resblock/model.hpp"
#include "resblock/simstudy.hpp"

namespace resblock {

using Json = nlohmann::json;

/// Provenance block embedded in every structured output. Reruns with the same
/// manifest (timestamp aside) reproduce byte-identical documents.
struct RunManifest {
  std::string command;
  Json config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::string tool_version;
  std::string timestamp;
};

Json manifest_to_json(const RunManifest& m);

/// FNV-1a content hash of a file, as 16 hex digits.
std::string file_digest(const std::string& path);

Json params_to_json(const ModelParams& params);
ModelParams params_from_json(const Json& j);

Json fit_config_to_json(const FitConfig& cfg);
Json fit_result_to_json(const FitResult& fit);
FitResult fit_result_from_json(const Json& j);

Json assessment_to_json(const AssessmentReport& report);
Json bias_study_to_json(const BiasStudyResult& study);
Json slack_study_to_json(const SlackStudyResult& study);

void write_text_file(const std::string& path, const std::string& body);

}  // namespace resblock
