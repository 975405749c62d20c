#pragma once

#include <cstdint>
#include <vector>

namespace pdm {

/// Uniform grid on [0, T]. Node k sits at k*T/n; cell k is the interval
/// (t_k, t_{k+1}] carrying Brownian increment k.
struct TimeGrid {
  double horizon = 0.0;
  int steps = 0;
  double dt = 0.0;
  std::vector<double> nodes;

  /// Index of the cell whose left node is eta(t); t = T maps to n.
  int cell_index(double t) const;

  /// Left grid node of the cell containing t (the grid projection of t).
  double eta(double t) const;
};

TimeGrid make_grid(double horizon, int steps);

/// Brownian increments, one row per time cell, one column per noise
/// dimension. This matrix is the sample point of the discretized space.
struct IncrementMatrix {
  int n = 0;
  int m = 0;
  std::vector<double> data;  // row-major n x m

  IncrementMatrix() = default;
  IncrementMatrix(int n_, int m_) : n(n_), m(m_), data(static_cast<std::size_t>(n_) * m_, 0.0) {}

  double& at(int k, int j) { return data[static_cast<std::size_t>(k) * m + j]; }
  double at(int k, int j) const { return data[static_cast<std::size_t>(k) * m + j]; }
};

/// Deterministic sampler: entries are i.i.d. N(0, dt) and a pure function
/// of (seed, traj_index), so results do not depend on scheduling.
IncrementMatrix sample_increments(std::uint64_t seed, std::uint64_t traj_index,
                                  const TimeGrid& grid, int noise_dim);

/// Sum groups of `factor` consecutive fine increments into one coarse cell.
IncrementMatrix coarsen(const IncrementMatrix& fine, int factor);

/// Gradient of a scalar functional with respect to the increments; entry
/// (k, j) is the constant value of the derivative field on cell k, noise
/// direction j.
struct GradientField {
  int n = 0;
  int m = 0;
  std::vector<double> data;

  GradientField() = default;
  GradientField(int n_, int m_) : n(n_), m(m_), data(static_cast<std::size_t>(n_) * m_, 0.0) {}

  double& at(int k, int j) { return data[static_cast<std::size_t>(k) * m + j]; }
  double at(int k, int j) const { return data[static_cast<std::size_t>(k) * m + j]; }
};

/// Dense second derivative with respect to increment pairs.
struct HessianField {
  int n = 0;
  int m = 0;
  std::vector<double> data;  // (n*m) x (n*m)

  HessianField() = default;
  HessianField(int n_, int m_)
      : n(n_), m(m_),
        data(static_cast<std::size_t>(n_) * m_ * n_ * m_, 0.0) {}

  std::size_t flat(int k, int j) const { return static_cast<std::size_t>(k) * m + j; }
  double& at(int k, int j, int k2, int j2) {
    return data[flat(k, j) * (static_cast<std::size_t>(n) * m) + flat(k2, j2)];
  }
  double at(int k, int j, int k2, int j2) const {
    return data[flat(k, j) * (static_cast<std::size_t>(n) * m) + flat(k2, j2)];
  }
};

/// A Wiener functional evaluated on one sample: value, gradient and
/// (optionally) Hessian per component, everything on a common (n, m) shape.
struct FunctionalState {
  std::vector<double> value;
  std::vector<GradientField> grad;
  std::vector<HessianField> hess;  // empty when second order data is absent

  int dim() const { return static_cast<int>(value.size()); }
  bool has_hessian() const { return !hess.empty(); }
};

/// L2([0,T]; R^m) inner product of two piecewise constant fields.
double malliavin_inner(const GradientField& a, const GradientField& b, const TimeGrid& grid);

/// Integrand of the discrete divergence: per-cell values plus, when the
/// integrand is random, the full matrix of its derivatives with respect to
/// the increments.
struct CellProcess {
  int n = 0;
  int m = 0;
  bool random = false;
  std::vector<double> value;  // n*m
  std::vector<double> grad;   // (n*m) x (n*m); required when random

  static CellProcess deterministic(int n, int m);
  static CellProcess with_gradients(int n, int m);

  double& value_at(int k, int j) { return value[static_cast<std::size_t>(k) * m + j]; }
  double value_at(int k, int j) const { return value[static_cast<std::size_t>(k) * m + j]; }
  double& grad_at(int k, int j, int k2, int j2) {
    const std::size_t nm = static_cast<std::size_t>(n) * m;
    return grad[(static_cast<std::size_t>(k) * m + j) * nm + static_cast<std::size_t>(k2) * m + j2];
  }
  double grad_at(int k, int j, int k2, int j2) const {
    const std::size_t nm = static_cast<std::size_t>(n) * m;
    return grad[(static_cast<std::size_t>(k) * m + j) * nm + static_cast<std::size_t>(k2) * m + j2];
  }
};

/// Discrete Skorohod integral: sum of value * increment minus the trace
/// correction dt * d u_k / d dW_k. Adjoint of the gradient on this space.
double skorohod(const CellProcess& u, const IncrementMatrix& dW, const TimeGrid& grid);

}  // namespace pdm
