#include <cstdint>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "shapelab/error.hpp"
#include "shapelab/experiments.hpp"

using namespace shapelab;

namespace {

ExperimentConfig from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  const Json j = Json::parse(is, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config '" + path + "' is not a JSON object");
  ExperimentConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    const auto& v = it.value();
    if (key == "experiment" && v.is_string()) cfg.name = v.get<std::string>();
    else if (key == "seed" && v.is_number_unsigned()) cfg.seed = v.get<std::uint64_t>();
    else if (key == "out" && v.is_string()) cfg.output_dir = v.get<std::string>();
    else if (key == "params" && v.is_object()) cfg.params = v;
    else throw ConfigError("config '" + path + "': bad or unknown key '" + key + "'");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shape-preserving semigroup experiments"};
  std::string name, config, out;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  bool list = false;
  auto* seed_opt = app.add_option("--seed", seed, "random seed (default 1)");
  app.add_option("-e,--experiment", name, "experiment to run");
  app.add_option("-c,--config", config, "JSON config with experiment, seed, out, params");
  app.add_option("-o,--out", out, "directory for CSV tables and summary.json");
  app.add_option("-s,--set", sets, "parameter override key=value (repeatable)");
  app.add_flag("-l,--list", list, "list experiments");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (list) {
      for (const auto& info : list_experiments())
        std::cout << info.name << "\t" << info.description << "\n    " << info.anchor << "\n";
      return 0;
    }
    ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : from_file(config);
    if (!name.empty()) cfg.name = name;
    if (!out.empty()) cfg.output_dir = out;
    if (seed_opt->count() > 0) cfg.seed = seed;
    for (const auto& s : sets) add_override(cfg.params, s);
    if (cfg.name.empty()) throw ConfigError("no experiment given (use --experiment or --list)");

    const auto report = run(cfg);
    std::cout << report.name << ": " << to_string(report.verdict) << "\n";
    for (auto it = report.metrics.begin(); it != report.metrics.end(); ++it)
      std::cout << "  " << it.key() << " = " << it.value().dump() << "\n";
    for (const auto& n : report.notes) std::cout << "  note: " << n << "\n";
    if (!cfg.output_dir.empty()) std::cout << "  wrote " << cfg.output_dir.string() << "\n";
    return exit_code(report.verdict);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
