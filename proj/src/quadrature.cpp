#include "pdm/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace pdm {

namespace {

// Eigenvalues and first eigenvector components of a symmetric tridiagonal
// matrix by the implicit-shift QL algorithm (EISPACK tql2, first row only).
void tridiagonal_eigen(std::vector<double>& diag, std::vector<double>& sub,
                       std::vector<double>& first_row) {
  const int n = static_cast<int>(diag.size());
  first_row.assign(n, 0.0);
  if (n == 0) return;
  first_row[0] = 1.0;
  if (n == 1) return;
  sub.push_back(0.0);

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
        if (std::abs(sub[m]) <= 1e-15 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("tridiagonal_eigen: no convergence");
        double g = (diag[l + 1] - diag[l]) / (2.0 * sub[l]);
        double r = std::hypot(g, 1.0);
        g = diag[m] - diag[l] + sub[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * sub[i];
          const double b = c * sub[i];
          r = std::hypot(f, g);
          sub[i + 1] = r;
          if (r == 0.0) {
            diag[i + 1] -= p;
            sub[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = diag[i + 1] - p;
          r = (diag[i] - g) * s + 2.0 * c * b;
          p = s * r;
          diag[i + 1] = g + p;
          g = c * r - b;
          f = first_row[i + 1];
          first_row[i + 1] = s * first_row[i] + c * f;
          first_row[i] = c * first_row[i] - s * f;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        diag[l] -= p;
        sub[l] = g;
        sub[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

GaussHermiteRule gauss_hermite(int count) {
  if (count < 1) throw std::invalid_argument("gauss_hermite: count must be >= 1");
  std::vector<double> diag(count, 0.0);
  std::vector<double> sub(count > 1 ? count - 1 : 0);
  for (int k = 1; k < count; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  std::vector<double> first_row;
  tridiagonal_eigen(diag, sub, first_row);

  GaussHermiteRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  std::vector<int> order(count);
  for (int i = 0; i < count; ++i) order[i] = i;
  for (int i = 1; i < count; ++i) {  // insertion sort by node
    int j = i;
    while (j > 0 && diag[order[j - 1]] > diag[order[j]]) {
      std::swap(order[j - 1], order[j]);
      --j;
    }
  }
  for (int i = 0; i < count; ++i) {
    rule.nodes[i] = diag[order[i]];
    rule.weights[i] = first_row[order[i]] * first_row[order[i]];
  }
  return rule;
}

double gh_expectation(const std::function<double(const IncrementMatrix&)>& functional,
                      const TimeGrid& grid, int noise_dim, int nodes_per_dim) {
  const int dims = grid.steps * noise_dim;
  if (dims > 4)
    throw std::invalid_argument("gh_expectation: n * noise_dim exceeds the oracle cap of 4");
  if (nodes_per_dim < 10)
    throw std::invalid_argument("gh_expectation: need at least 10 nodes per dimension");

  const GaussHermiteRule rule = gauss_hermite(nodes_per_dim);
  const double scale = std::sqrt(grid.dt);

  IncrementMatrix dw(grid.steps, noise_dim);
  std::vector<int> index(dims, 0);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    for (int a = 0; a < dims; ++a) {
      dw.data[a] = scale * rule.nodes[index[a]];
      weight *= rule.weights[index[a]];
    }
    total += weight * functional(dw);

    int a = 0;
    while (a < dims && ++index[a] == nodes_per_dim) index[a++] = 0;
    if (a == dims) break;
  }
  return total;
}

}  // namespace pdm
