#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pdm/config.hpp"

namespace pdm {

struct ReportBundle {
  std::vector<std::string> csv_paths;
  std::string summary_path;
  nlohmann::json summary;
  bool check_passed = true;
};

/// Dispatch a validated configuration to its study, write the CSV outputs
/// and the JSON summary into the configured directory, and evaluate the
/// pass/fail thresholds when check mode is on. Every CSV byte is a pure
/// function of (config, seed); the summary additionally carries wall-clock
/// time.
ReportBundle run_experiment(const ExperimentConfig& cfg);

}  // namespace pdm
