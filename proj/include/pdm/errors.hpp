#pragma once

#include <stdexcept>
#include <string>

namespace pdm {

/// Invalid or malformed configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally valid configuration that the implementation refuses to run,
/// e.g. a cost cap exceeded (CLI exit code 3).
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A sample whose Malliavin covariance is numerically singular while the
/// attached localization weight does not vanish.
struct DegenerateSample : std::runtime_error {
  explicit DegenerateSample(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pdm
