#include "pdm/weights.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdm/errors.hpp"

namespace pdm {

namespace {

double determinant(const std::vector<double>& a, int d) {
  if (d == 1) return a[0];
  if (d == 2) return a[0] * a[3] - a[1] * a[2];
  // Gaussian elimination with partial pivoting for the general small case.
  std::vector<double> w = a;
  double det = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(w[r * d + c]) > std::abs(w[piv * d + c])) piv = r;
    if (w[piv * d + c] == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < d; ++j) std::swap(w[piv * d + j], w[c * d + j]);
      det = -det;
    }
    det *= w[c * d + c];
    for (int r = c + 1; r < d; ++r) {
      const double f = w[r * d + c] / w[c * d + c];
      for (int j = c; j < d; ++j) w[r * d + j] -= f * w[c * d + j];
    }
  }
  return det;
}

std::vector<double> inverse(const std::vector<double>& a, int d) {
  std::vector<double> w = a, inv(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) inv[i * d + i] = 1.0;
  for (int c = 0; c < d; ++c) {
    int piv = c;
    for (int r = c + 1; r < d; ++r)
      if (std::abs(w[r * d + c]) > std::abs(w[piv * d + c])) piv = r;
    for (int j = 0; j < d; ++j) {
      std::swap(w[piv * d + j], w[c * d + j]);
      std::swap(inv[piv * d + j], inv[c * d + j]);
    }
    const double p = w[c * d + c];
    for (int j = 0; j < d; ++j) {
      w[c * d + j] /= p;
      inv[c * d + j] /= p;
    }
    for (int r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = w[r * d + c];
      for (int j = 0; j < d; ++j) {
        w[r * d + j] -= f * w[c * d + j];
        inv[r * d + j] -= f * inv[c * d + j];
      }
    }
  }
  return inv;
}

bool gradient_zero(const FunctionalState& f) {
  for (const GradientField& g : f.grad)
    for (double v : g.data)
      if (v != 0.0) return false;
  return true;
}

}  // namespace

CovarianceMatrix covariance(const FunctionalState& F, const TimeGrid& grid, double det_floor_rel) {
  if (F.grad.empty()) throw std::invalid_argument("covariance: gradient missing");
  const int d = F.dim();
  CovarianceMatrix cov;
  cov.d = d;
  cov.sigma.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double s = malliavin_inner(F.grad[i], F.grad[j], grid);
      cov.sigma[i * d + j] = s;
      cov.sigma[j * d + i] = s;
    }
  cov.det = determinant(cov.sigma, d);
  double trace = 0.0;
  for (int i = 0; i < d; ++i) trace += cov.sigma[i * d + i];
  const double floor = det_floor_rel * std::pow(trace / d, d);
  cov.invertible = cov.det > floor && cov.det > 0.0;
  if (cov.invertible) cov.gamma = inverse(cov.sigma, d);
  return cov;
}

WeightSample ibp_weight_first(const FunctionalState& F, const FunctionalState& G, int i,
                              const IncrementMatrix& dW, const TimeGrid& grid) {
  if (!F.has_hessian()) throw std::invalid_argument("ibp_weight_first: F needs Hessian data");
  if (G.grad.empty()) throw std::invalid_argument("ibp_weight_first: G needs gradient data");
  const int d = F.dim();
  if (i < 0 || i >= d) throw std::invalid_argument("ibp_weight_first: component out of range");
  const int n = dW.n, m = dW.m;
  const int nm = n * m;
  const double dt = grid.dt;

  const CovarianceMatrix cov = covariance(F, grid);
  WeightSample out;
  out.alpha = {i};
  if (!cov.invertible) {
    if (G.value[0] == 0.0 && gradient_zero(G)) {
      out.h = 0.0;  // localized away
      out.localization = 0.0;
      return out;
    }
    throw DegenerateSample("ibp_weight_first: singular Malliavin covariance on an unlocalized sample");
  }

  const double g_val = G.value[0];
  // dSigma^{ab}/dxi_c = dt * sum_{c'} (H_a[c',c] DF_b[c'] + DF_a[c'] H_b[c',c])
  // contracted against gamma on both sides gives dgamma^{ij}/dxi_c.
  double h = 0.0;
  for (int j = 0; j < d; ++j) {
    const double gam = cov.gamma[i * d + j];
    // Ito-sum part and the trace correction, cell by cell.
    for (int c = 0; c < nm; ++c) {
      const double df_jc = F.grad[j].data[c];
      h += gam * g_val * df_jc * dW.data[c];
      // d/dxi_c of (gamma^{ij} G DF_j[c]):
      double dgamma = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double dsig = 0.0;
          for (int c2 = 0; c2 < nm; ++c2)
            dsig += F.hess[a].data[static_cast<std::size_t>(c2) * nm + c] * F.grad[b].data[c2] +
                    F.grad[a].data[c2] * F.hess[b].data[static_cast<std::size_t>(c2) * nm + c];
          dgamma -= cov.gamma[i * d + a] * dt * dsig * cov.gamma[b * d + j];
        }
      const double dG = G.grad[0].data[c];
      const double dDF = F.hess[j].data[static_cast<std::size_t>(c) * nm + c];
      h -= dt * (dgamma * g_val * df_jc + gam * dG * df_jc + gam * g_val * dDF);
    }
  }
  out.h = h;
  return out;
}

double ibp_weight_from_contractions(const IbpContractions& c, const IncrementMatrix& dW,
                                    const TimeGrid& grid) {
  const double sigma = c.covariance;
  if (!(sigma > 0.0)) throw DegenerateSample("ibp_weight_from_contractions: zero covariance");
  const double gamma = 1.0 / sigma;
  double ito = 0.0;
  for (int k = 0; k < dW.n; ++k) ito += c.gradient[k] * dW.at(k, 0);
  const double dt = grid.dt;
  return gamma * ito - dt * gamma * c.trace_hess + 2.0 * dt * dt * gamma * gamma * c.quad_hess;
}

namespace {

// H_i(F, G) in jet arithmetic. Consumes two Taylor orders of F and one of G.
Jet jet_weight_once(const JetFunctional& F, const Jet& G, int i, const IncrementMatrix& dW,
                    const TimeGrid& grid) {
  const int d = F.dim();
  const int nm = F.n * F.m;
  const int fo = F.component[0].order();
  const int out_order = std::min(fo - 2, G.order() - 1);
  if (out_order < 0)
    throw std::invalid_argument("ibp_weight_iterated: insufficient Taylor order");
  const double dt = grid.dt;

  // Covariance matrix of jets.
  std::vector<Jet> sigma(static_cast<std::size_t>(d) * d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      Jet s = Jet::constant(nm, fo - 1, 0.0);
      for (int c = 0; c < nm; ++c) s += F.component[a].partial(c) * F.component[b].partial(c);
      s = s * dt;
      sigma[a * d + b] = s;
      sigma[b * d + a] = s;
    }
  // Inverse for d <= 2 via the adjugate.
  std::vector<Jet> gamma(static_cast<std::size_t>(d) * d);
  if (d == 1) {
    gamma[0] = jet_reciprocal(sigma[0]);
  } else if (d == 2) {
    const Jet det = sigma[0] * sigma[3] - sigma[1] * sigma[2];
    const Jet inv_det = jet_reciprocal(det);
    gamma[0] = sigma[3] * inv_det;
    gamma[3] = sigma[0] * inv_det;
    gamma[1] = -sigma[1] * inv_det;
    gamma[2] = -sigma[2] * inv_det;
  } else {
    throw std::invalid_argument("ibp_weight_iterated: d <= 2 only");
  }

  Jet h = Jet::constant(nm, out_order, 0.0);
  for (int j = 0; j < d; ++j) {
    for (int c = 0; c < nm; ++c) {
      const Jet u = gamma[i * d + j] * G * F.component[j].partial(c);
      const Jet xi = Jet::variable(nm, u.order(), c, dW.data[c]);
      h += (u * xi - u.partial(c) * dt).truncated(out_order);
    }
  }
  return h;
}

}  // namespace

WeightSample ibp_weight_iterated(const JetFunctional& F, const Jet& G,
                                 const std::vector<int>& alpha, const IncrementMatrix& dW,
                                 const TimeGrid& grid) {
  WeightSample out;
  out.alpha = alpha;
  if (alpha.size() > 2)
    throw std::invalid_argument("ibp_weight_iterated: |alpha| <= 2 supported");
  if (alpha.empty()) {
    out.h = G.value();
    return out;
  }
  if (G.is_zero()) {
    out.h = 0.0;  // weights are local: nothing survives where G vanishes
    out.localization = 0.0;
    return out;
  }
  const int need = static_cast<int>(alpha.size()) + 1;
  for (const Jet& c : F.component)
    if (c.order() < need)
      throw std::invalid_argument("ibp_weight_iterated: F needs Taylor order " +
                                  std::to_string(need));
  Jet g = G;
  for (int idx : alpha) g = jet_weight_once(F, g, idx, dW, grid);
  out.h = g.value();
  return out;
}

double ou_apply(const FunctionalState& F, const IncrementMatrix& dW, const TimeGrid& grid) {
  if (F.dim() != 1) throw std::invalid_argument("ou_apply: scalar functionals only");
  if (!F.has_hessian()) throw std::invalid_argument("ou_apply: Hessian data required");
  const int nm = dW.n * dW.m;
  double ito = 0.0, trace = 0.0;
  for (int c = 0; c < nm; ++c) {
    ito += F.grad[0].data[c] * dW.data[c];
    trace += F.hess[0].data[static_cast<std::size_t>(c) * nm + c];
  }
  return -(ito - grid.dt * trace);
}

double localization_R(const FunctionalState& F1, const FunctionalState& F2, const TimeGrid& grid) {
  if (F1.dim() != F2.dim()) throw std::invalid_argument("localization_R: dimension mismatch");
  const int d = F1.dim();
  const CovarianceMatrix cov = covariance(F1, grid);
  if (!(cov.det > 0.0)) return std::numeric_limits<double>::infinity();

  double num = 0.0;
  for (int i = 0; i < d; ++i) {
    GradientField diff = F1.grad[i];
    for (std::size_t a = 0; a < diff.data.size(); ++a) diff.data[a] -= F2.grad[i].data[a];
    num += malliavin_inner(diff, diff, grid);
  }
  double hs2 = 0.0;
  for (double v : cov.sigma) hs2 += v * v;
  return num * std::pow(1.0 + hs2, 0.5 * (d - 1)) / cov.det;
}

namespace {

// Smooth glue: q(0+) = 0, q(1-) = 1, flat to all orders at both ends.
double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

}  // namespace

double cutoff(const CutoffSpec& spec, CutoffKind which, double x) {
  if (x < 0.0) throw std::invalid_argument("cutoff: argument must be nonnegative");
  const double lo = which == CutoffKind::psi ? spec.psi_one_until : spec.psi1_one_until;
  const double hi = which == CutoffKind::psi ? spec.psi_zero_from : spec.psi1_zero_from;
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  return smooth_step((hi - x) / (hi - lo));
}

}  // namespace pdm
