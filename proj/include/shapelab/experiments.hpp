#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shapelab/semigroups.hpp"
#include "shapelab/shape.hpp"

namespace shapelab {

using Json = nlohmann::ordered_json;

enum class Verdict { Pass, Fail, Informational };

const char* to_string(Verdict v);

struct ExperimentConfig {
  std::string name;
  Json params = Json::object();  // overrides of the experiment's defaults
  std::filesystem::path output_dir;
  std::uint64_t seed = 1;
};

struct ExperimentReport {
  std::string name;
  Json params;  // effective parameters
  std::uint64_t seed = 1;
  std::vector<std::pair<std::string, std::string>> tables;  // file stem, CSV text
  Verdict verdict = Verdict::Informational;
  std::vector<std::string> notes;
  Json metrics = Json::object();
};

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::string anchor;  // the claim the experiment checks
};

std::vector<ExperimentInfo> list_experiments();

/// Throws ConfigError for unknown names.
const ExperimentInfo& find_experiment(const std::string& name);

Json default_params(const std::string& name);

/// Defaults merged with overrides. Unknown keys and type mismatches throw
/// ConfigError. Integers are accepted where reals are expected.
Json resolve_params(const std::string& name, const Json& overrides);

/// Parses `key=value` into overrides; the value is read as JSON when it
/// parses, otherwise as a string.
void add_override(Json& overrides, const std::string& assignment);

/// Resolves parameters, runs, and writes the tables and summary.json when
/// output_dir is set. Deterministic in (name, params, seed).
ExperimentReport run(const ExperimentConfig& config);

void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

Json summary_json(const ExperimentReport& report);

/// 0 for Pass and Informational, 1 for Fail.
int exit_code(Verdict v);

/// For each corpus member of the cone, a nearby smooth member built by the
/// shape approximators, with its distance and membership. Non-members are
/// reported with their witness. Verdict Informational.
ExperimentReport compatibility_probe(const ConeSpec& cone, const SemigroupEvaluator& ev,
                                     const std::vector<GridFunction>& corpus, double eps = 0.05);

}  // namespace shapelab
