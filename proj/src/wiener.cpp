#include "pdm/wiener.hpp"

#include <cmath>
#include <stdexcept>

#include "pdm/rng.hpp"

namespace pdm {

TimeGrid make_grid(double horizon, int steps) {
  if (!(horizon > 0.0)) throw std::invalid_argument("make_grid: horizon must be positive");
  if (steps < 1) throw std::invalid_argument("make_grid: steps must be >= 1");
  TimeGrid g;
  g.horizon = horizon;
  g.steps = steps;
  g.dt = horizon / steps;
  g.nodes.resize(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) g.nodes[k] = k * horizon / steps;
  g.nodes[steps] = horizon;
  return g;
}

int TimeGrid::cell_index(double t) const {
  if (t <= 0.0) return 0;
  int k = static_cast<int>(std::floor(t * steps / horizon));
  if (k > steps) k = steps;
  return k;
}

double TimeGrid::eta(double t) const { return nodes[cell_index(t)]; }

IncrementMatrix sample_increments(std::uint64_t seed, std::uint64_t traj_index,
                                  const TimeGrid& grid, int noise_dim) {
  if (noise_dim < 1) throw std::invalid_argument("sample_increments: noise_dim must be >= 1");
  IncrementMatrix dw(grid.steps, noise_dim);
  NormalStream stream(seed, traj_index);
  const double scale = std::sqrt(grid.dt);
  for (int k = 0; k < grid.steps; ++k)
    for (int j = 0; j < noise_dim; ++j) dw.at(k, j) = scale * stream.next();
  return dw;
}

IncrementMatrix coarsen(const IncrementMatrix& fine, int factor) {
  if (factor < 1) throw std::invalid_argument("coarsen: factor must be >= 1");
  if (fine.n % factor != 0)
    throw std::invalid_argument("coarsen: fine step count not divisible by factor");
  IncrementMatrix coarse(fine.n / factor, fine.m);
  for (int kc = 0; kc < coarse.n; ++kc)
    for (int j = 0; j < fine.m; ++j) {
      double s = 0.0;
      for (int q = 0; q < factor; ++q) s += fine.at(kc * factor + q, j);
      coarse.at(kc, j) = s;
    }
  return coarse;
}

double malliavin_inner(const GradientField& a, const GradientField& b, const TimeGrid& grid) {
  if (a.n != b.n || a.m != b.m || a.n != grid.steps)
    throw std::invalid_argument("malliavin_inner: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s * grid.dt;
}

CellProcess CellProcess::deterministic(int n, int m) {
  CellProcess u;
  u.n = n;
  u.m = m;
  u.random = false;
  u.value.assign(static_cast<std::size_t>(n) * m, 0.0);
  return u;
}

CellProcess CellProcess::with_gradients(int n, int m) {
  CellProcess u = deterministic(n, m);
  u.random = true;
  const std::size_t nm = static_cast<std::size_t>(n) * m;
  u.grad.assign(nm * nm, 0.0);
  return u;
}

double skorohod(const CellProcess& u, const IncrementMatrix& dW, const TimeGrid& grid) {
  if (u.n != dW.n || u.m != dW.m || u.n != grid.steps)
    throw std::invalid_argument("skorohod: shape mismatch");
  if (u.random && u.grad.empty())
    throw std::invalid_argument("skorohod: random integrand without gradient data");
  double ito = 0.0;
  for (std::size_t i = 0; i < u.value.size(); ++i) ito += u.value[i] * dW.data[i];
  double trace = 0.0;
  if (u.random) {
    for (int k = 0; k < u.n; ++k)
      for (int j = 0; j < u.m; ++j) trace += u.grad_at(k, j, k, j);
  }
  return ito - grid.dt * trace;
}

}  // namespace pdm
