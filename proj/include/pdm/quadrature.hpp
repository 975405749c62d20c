#pragma once

#include <functional>
#include <vector>

#include "pdm/wiener.hpp"

namespace pdm {

/// Gauss-Hermite rule for the standard normal weight: sum w_i f(x_i)
/// integrates f against N(0,1) exactly for polynomials of degree < 2*count.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(int count);

/// Brute-force expectation of a functional of the increments by
/// tensor-product Gauss-Hermite quadrature; the independent oracle used to
/// verify every identity on the discretized space. Exponential in
/// n * noise_dim, capped at 4 coordinates.
double gh_expectation(const std::function<double(const IncrementMatrix&)>& functional,
                      const TimeGrid& grid, int noise_dim, int nodes_per_dim = 20);

}  // namespace pdm
