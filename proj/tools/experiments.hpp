#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace idsim::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct RunResult {
  nlohmann::json report;  // experiment-specific section
  bool pass = true;       // verdict; pure generation always passes
  CsvTable csv;
};

struct ExperimentInfo {
  std::string name;
  std::string models;
  std::string params;
};

/// Registered experiments in a fixed order.
const std::vector<ExperimentInfo>& experiments();

/// Text table of experiments().
std::string list_experiments();

/// Executes config (already merged with command-line overrides). Throws
/// ModelError / std::invalid_argument on a bad config.
RunResult run_experiment(const nlohmann::json& config);

/// Full report document: config echo, version, seed, verdict, result and
/// a timestamp (the only field outside the determinism contract).
nlohmann::json make_report(const nlohmann::json& config, const RunResult& result,
                           const std::string& timestamp);

std::string version();

}  // namespace idsim::cli
