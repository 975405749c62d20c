#pragma once

#include <cstdint>
#include <vector>

#include "pdm/models.hpp"
#include "pdm/rate.hpp"
#include "pdm/wiener.hpp"

namespace pdm {

/// Euler step of the path-dependent scheme: coefficients frozen at the left
/// node on the path stopped there. Throws with the step index when a
/// coefficient turns non-finite.
DiscretePath solve(const CoefficientModel& model, const TimeGrid& grid,
                   const IncrementMatrix& dW, const std::vector<double>& x0);

/// First Malliavin variation of the scheme: entry (k, l, j, i) holds the
/// derivative of X^i(t_l) with respect to increment (k, j). Entries with
/// k >= l are exact zeros (adaptedness).
struct VariationTensor {
  int n = 0, m = 0, d = 1;
  std::vector<double> data;  // [k][l][j][i]

  VariationTensor() = default;
  VariationTensor(int n_, int m_, int d_)
      : n(n_), m(m_), d(d_),
        data(static_cast<std::size_t>(n_) * (n_ + 1) * m_ * d_, 0.0) {}

  double& at(int k, int l, int j = 0, int i = 0) {
    return data[((static_cast<std::size_t>(k) * (n + 1) + l) * m + j) * d + i];
  }
  double at(int k, int l, int j = 0, int i = 0) const {
    return data[((static_cast<std::size_t>(k) * (n + 1) + l) * m + j) * d + i];
  }

  /// Gradient field of component i of the terminal value.
  GradientField terminal_gradient(int i = 0) const;
};

VariationTensor first_variation(const CoefficientModel& model, const TimeGrid& grid,
                                const IncrementMatrix& dW, const std::vector<double>& x0);

/// Second variation (scalar featured models). Cost grows like n^3, so the
/// step count is gated; raise the cap explicitly when accepting the cost.
struct SecondVariationTensor {
  int n = 0;
  std::vector<double> data;  // [k][k2][l], d = m = 1

  SecondVariationTensor() = default;
  explicit SecondVariationTensor(int n_)
      : n(n_), data(static_cast<std::size_t>(n_) * n_ * (n_ + 1), 0.0) {}

  double& at(int k, int k2, int l) {
    return data[(static_cast<std::size_t>(k) * n + k2) * (n + 1) + l];
  }
  double at(int k, int k2, int l) const {
    return data[(static_cast<std::size_t>(k) * n + k2) * (n + 1) + l];
  }
};

SecondVariationTensor second_variation(const CoefficientModel& model, const TimeGrid& grid,
                                       const IncrementMatrix& dW, const std::vector<double>& x0,
                                       int step_cap = 64);

/// Terminal value with gradient (and Hessian when requested) packaged for
/// the weight machinery.
FunctionalState terminal_state(const CoefficientModel& model, const TimeGrid& grid,
                               const IncrementMatrix& dW, const std::vector<double>& x0,
                               bool with_hessian = false, int hessian_step_cap = 64);

/// Everything the first-order integration-by-parts weight needs from one
/// trajectory, without materializing the Hessian: terminal value, gradient,
/// covariance, Hessian trace and the quadratic form grad^T Hess grad.
/// Scalar models only; cost O(n^2).
struct IbpContractions {
  double value = 0.0;
  std::vector<double> gradient;  // n entries (m = 1)
  double covariance = 0.0;       // |DF|_H^2
  double trace_hess = 0.0;       // sum_k d^2F / d dW_k^2
  double quad_hess = 0.0;        // grad^T Hess grad
};

IbpContractions ibp_contractions(const CoefficientModel& model, const TimeGrid& grid,
                                 const IncrementMatrix& dW, const std::vector<double>& x0);

struct StudyConfig {
  std::vector<int> coarse_steps;
  int fine_steps = 0;
  std::size_t num_paths = 0;
  double p = 2.0;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct StrongStudyResult {
  RateTable errors;      // L^p of the pathwise sup distance to the fine reference
  RateTable increments;  // mean of the worst within-cell squared increment
};

/// Strong error ladder under common random numbers: each coarse resolution
/// is driven by sums of the same fine increments, and the coarse scheme is
/// compared at every fine node through its own linear-in-(t, W) bridge.
StrongStudyResult strong_error_study(const CoefficientModel& model,
                                     const std::vector<double>& x0, double horizon,
                                     const StudyConfig& cfg);

/// Same ladder for the Sobolev-type norm: pathwise sup distance plus the
/// sup over grid times of the H-distance between derivative fields, the
/// fine field being averaged onto coarse cells.
RateTable derivative_error_study(const CoefficientModel& model, const std::vector<double>& x0,
                                 double horizon, const StudyConfig& cfg);

}  // namespace pdm
