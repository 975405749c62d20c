#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdm/density.hpp"
#include "pdm/models.hpp"

namespace pdm {

enum class ExperimentKind {
  strong_rate,
  derivative_rate,
  ibp_check,
  density_rate,
  holder_norm,
  ellipticity_check,
};

std::string to_string(ExperimentKind kind);

/// Pass/fail thresholds applied in --check mode. Defaults are pinned per
/// experiment kind; a config may override them through its "check" block.
struct CheckThresholds {
  double slope_min = 0.0;
  double slope_max = 0.0;
  double r2_min = 0.0;
  double increment_slope_min = 0.0;
  double increment_slope_max = 0.0;
  double theta_min = 0.0;
  double decrease_sigmas = 3.0;
  double tolerance = 1e-6;
  double exact_threshold = 1e-10;
  std::optional<double> min_eigenvalue;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::strong_rate;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  int workers = 0;
  bool check_mode = false;

  std::optional<CoefficientModel> model;
  double horizon = 1.0;
  double x0 = 0.0;
  std::size_t num_paths = 0;

  std::vector<int> coarse_steps;
  int fine_steps = 0;
  double p = 2.0;

  std::vector<int> levels;
  int reference_level = 0;
  std::vector<double> betas{0.0};
  DensityMethod method = DensityMethod::both;
  int query_points = 41;
  double query_span_std = 4.0;
  int second_variation_cap = 64;
  std::optional<double> bandwidth;

  int quadrature_nodes = 96;

  std::vector<double> values;
  double spacing = 0.0;
  double beta = 0.0;

  int steps = 0;

  CheckThresholds check;
  std::string config_hash;
};

/// The JSON schema text published in-repo (embedded at build time).
const char* config_schema_text();

/// Validate a document against the published schema; throws ConfigError
/// with a path-qualified message on the first violation.
void validate_against_schema(const nlohmann::json& doc);

/// Schema validation plus semantic checks and default injection.
ExperimentConfig parse_config(const nlohmann::json& doc);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace pdm
