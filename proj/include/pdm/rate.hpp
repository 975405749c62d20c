#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pdm {

struct FitResult {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares on (x, y) pairs; rejects fewer than three points
/// or repeated abscissae.
FitResult fit_rate(const std::vector<std::pair<double, double>>& points);

struct RatePoint {
  double level = 0.0;
  double resolution = 0.0;
  double error = 0.0;
  double stderr_ = 0.0;
};

/// Study output: (resolution, error) ladder plus the fitted log2-log2 slope.
/// `fit` is absent when the errors sit at the exactness floor.
struct RateTable {
  std::vector<RatePoint> rows;
  std::optional<FitResult> fit;
  bool exact = false;
  std::uint64_t seed = 0;
  std::string config_hash;
};

/// Fit log2(error) against log2(resolution) over the table rows.
std::optional<FitResult> fit_log2_rows(const std::vector<RatePoint>& rows);

}  // namespace pdm
