#include "pdm/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdm {

double DiscretePath::eval(double s, int i) const {
  if (s <= 0.0) return at(0, i);  // constant pre-history
  if (s >= grid.horizon) return at(grid.steps, i);
  const double pos = s / grid.dt;
  int k = static_cast<int>(std::floor(pos));
  if (k >= grid.steps) k = grid.steps - 1;
  const double frac = pos - k;
  return (1.0 - frac) * at(k, i) + frac * at(k + 1, i);
}

CoeffFamily::Derivs CoeffFamily::eval(double u, double v) const {
  const double su = std::sin(u), cu = std::cos(u);
  const double sv = std::sin(v), cv = std::cos(v);
  Derivs d;
  d.f = c + lin_u * u + lin_v * v + sin_u * su + cos_v * cv + sin_u_cos_v * su * cv;
  d.fu = lin_u + sin_u * cu + sin_u_cos_v * cu * cv;
  d.fv = lin_v - cos_v * sv - sin_u_cos_v * su * sv;
  d.fuu = -sin_u * su - sin_u_cos_v * su * cv;
  d.fuv = -sin_u_cos_v * cu * sv;
  d.fvv = -cos_v * cv - sin_u_cos_v * su * cv;
  return d;
}

double CoeffFamily::derivative_bound_u() const {
  return std::abs(lin_u) + std::abs(sin_u) + std::abs(sin_u_cos_v);
}

double CoeffFamily::derivative_bound_v() const {
  return std::abs(lin_v) + std::abs(cos_v) + std::abs(sin_u_cos_v);
}

double CoeffFamily::constant_bound() const {
  return std::abs(c) + std::abs(sin_u) + std::abs(cos_v) + std::abs(sin_u_cos_v);
}

CoefficientModel CoefficientModel::constant(std::vector<double> sigma, std::vector<double> drift,
                                            int d, int m, double ellipticity_floor) {
  if (static_cast<int>(sigma.size()) != d * m || static_cast<int>(drift.size()) != d)
    throw std::invalid_argument("constant model: coefficient shape mismatch");
  CoefficientModel mod;
  mod.kind_ = ModelKind::constant;
  mod.d_ = d;
  mod.m_ = m;
  mod.floor_ = ellipticity_floor;
  mod.u_feature_ = UFeature::none;
  mod.sigma0_ = std::move(sigma);
  mod.drift0_ = std::move(drift);
  return mod;
}

CoefficientModel CoefficientModel::markovian(CoeffFamily sigma, CoeffFamily drift,
                                             double ellipticity_floor) {
  CoefficientModel mod;
  mod.kind_ = ModelKind::markovian;
  mod.floor_ = ellipticity_floor;
  mod.u_feature_ = UFeature::current;
  mod.sigma_family_ = sigma;
  mod.drift_family_ = drift;
  return mod;
}

CoefficientModel CoefficientModel::delay(CoeffFamily sigma, CoeffFamily drift, double lag,
                                         double ellipticity_floor) {
  if (!(lag > 0.0)) throw std::invalid_argument("delay model: lag must be positive");
  CoefficientModel mod;
  mod.kind_ = ModelKind::delay;
  mod.floor_ = ellipticity_floor;
  mod.u_feature_ = UFeature::lag;
  mod.tau_ = lag;
  mod.sigma_family_ = sigma;
  mod.drift_family_ = drift;
  return mod;
}

CoefficientModel CoefficientModel::distributed_delay(CoeffFamily sigma, CoeffFamily drift,
                                                     double ellipticity_floor) {
  CoefficientModel mod;
  mod.kind_ = ModelKind::distributed_delay;
  mod.floor_ = ellipticity_floor;
  mod.u_feature_ = UFeature::integral;
  mod.sigma_family_ = sigma;
  mod.drift_family_ = drift;
  return mod;
}

void CoefficientModel::require_featured() const {
  if (kind_ == ModelKind::constant)
    throw std::logic_error("constant model carries no feature families");
}

std::pair<double, double> CoefficientModel::features(int t_index, const DiscretePath& path) const {
  require_featured();
  const double v = path.at(t_index);
  double u = 0.0;
  switch (u_feature_) {
    case UFeature::current:
      u = v;
      break;
    case UFeature::lag:
      u = path.eval(path.grid.nodes[t_index] - tau_);
      break;
    case UFeature::integral: {
      // Trapezoid over [0, t_index]; matches the weights reported below.
      double acc = 0.0;
      for (int s = 0; s < t_index; ++s) acc += 0.5 * path.grid.dt * (path.at(s) + path.at(s + 1));
      u = acc;
      break;
    }
    case UFeature::none:
      break;
  }
  return {u, v};
}

FeatureWeights CoefficientModel::u_weights(int t_index, const TimeGrid& grid) const {
  FeatureWeights w;
  switch (u_feature_) {
    case UFeature::none:
      break;
    case UFeature::current:
      w.terms.push_back({t_index, 1.0});
      break;
    case UFeature::lag: {
      const double s = grid.nodes[t_index] - tau_;
      if (s <= 0.0) {
        w.terms.push_back({0, 1.0});
      } else {
        const double pos = s / grid.dt;
        int k = static_cast<int>(std::floor(pos));
        if (k >= grid.steps) k = grid.steps - 1;
        const double frac = pos - k;
        if (frac == 0.0) {
          w.terms.push_back({k, 1.0});
        } else {
          w.terms.push_back({k, 1.0 - frac});
          w.terms.push_back({k + 1, frac});
        }
      }
      break;
    }
    case UFeature::integral: {
      if (t_index > 0) {
        w.terms.push_back({0, 0.5 * grid.dt});
        for (int s = 1; s < t_index; ++s) w.terms.push_back({s, grid.dt});
        w.terms.push_back({t_index, 0.5 * grid.dt});
      }
      break;
    }
  }
  return w;
}

CoeffValues CoefficientModel::eval_coeffs(int t_index, const DiscretePath& path) const {
  if (t_index < 0 || t_index > path.grid.steps)
    throw std::invalid_argument("eval_coeffs: t_index out of range");
  CoeffValues out;
  if (kind_ == ModelKind::constant) {
    out.sigma = sigma0_;
    out.drift = drift0_;
    return out;
  }
  const auto [u, v] = features(t_index, path);
  out.sigma = {sigma_family_.eval(u, v).f};
  out.drift = {drift_family_.eval(u, v).f};
  return out;
}

CoeffGradients CoefficientModel::coeff_gradients(int t_index, const DiscretePath& path) const {
  if (t_index < 0 || t_index > path.grid.steps)
    throw std::invalid_argument("coeff_gradients: t_index out of range");
  CoeffGradients out;
  if (kind_ == ModelKind::constant) return out;
  const auto [u, v] = features(t_index, path);
  const auto ds = sigma_family_.eval(u, v);
  const auto db = drift_family_.eval(u, v);
  for (const auto& [s, w] : u_weights(t_index, path.grid).terms) {
    out[s].dsigma += ds.fu * w;
    out[s].ddrift += db.fu * w;
  }
  out[t_index].dsigma += ds.fv;
  out[t_index].ddrift += db.fv;
  return out;
}

CoeffHessians CoefficientModel::coeff_hessians(int t_index, const DiscretePath& path) const {
  if (t_index < 0 || t_index > path.grid.steps)
    throw std::invalid_argument("coeff_hessians: t_index out of range");
  CoeffHessians out;
  if (kind_ == ModelKind::constant) return out;
  const auto [u, v] = features(t_index, path);
  const auto ds = sigma_family_.eval(u, v);
  const auto db = drift_family_.eval(u, v);

  // Collapse u weights per grid index, then apply
  //   d2f/dx_s dx_t = fuu W_s W_t + fuv (W_s [t=l] + W_t [s=l]) + fvv [s=l][t=l].
  std::map<int, double> w;
  for (const auto& [s, ws] : u_weights(t_index, path.grid).terms) w[s] += ws;
  std::vector<int> support;
  for (const auto& [s, ws] : w) support.push_back(s);
  if (w.find(t_index) == w.end()) support.push_back(t_index);

  auto weight_of = [&w](int s) {
    auto it = w.find(s);
    return it == w.end() ? 0.0 : it->second;
  };
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = a; b < support.size(); ++b) {
      const int s = std::min(support[a], support[b]);
      const int t = std::max(support[a], support[b]);
      const double ws = weight_of(s), wt = weight_of(t);
      const double cross = ws * (t == t_index ? 1.0 : 0.0) + wt * (s == t_index ? 1.0 : 0.0);
      const double vv = (s == t_index && t == t_index) ? 1.0 : 0.0;
      out[{s, t}] = {ds.fuu * ws * wt + ds.fuv * cross + ds.fvv * vv,
                     db.fuu * ws * wt + db.fuv * cross + db.fvv * vv};
    }
  return out;
}

double CoefficientModel::lipschitz_constant(double horizon) const {
  if (kind_ == ModelKind::constant) return 0.0;
  const double feature_lip = (u_feature_ == UFeature::integral) ? horizon : 1.0;
  const double s = sigma_family_.derivative_bound_u() * feature_lip +
                   sigma_family_.derivative_bound_v();
  const double b = drift_family_.derivative_bound_u() * feature_lip +
                   drift_family_.derivative_bound_v();
  return s > b ? s : b;
}

double CoefficientModel::growth_constant(double horizon) const {
  if (kind_ == ModelKind::constant) {
    double mx = 0.0;
    for (double v : sigma0_) mx = std::max(mx, std::abs(v));
    for (double v : drift0_) mx = std::max(mx, std::abs(v));
    return mx;
  }
  const double lin = lipschitz_constant(horizon);
  const double off =
      std::max(sigma_family_.constant_bound(), drift_family_.constant_bound());
  return std::max(lin, off);
}

namespace {

// Smallest eigenvalue of a small symmetric matrix by cyclic Jacobi.
double min_eigenvalue_sym(std::vector<double> a, int d) {
  if (d == 1) return a[0];
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += std::abs(a[p * d + q]);
    if (off < 1e-14) break;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * apq, a[q * d + q] - a[p * d + p]);
        const double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < d; ++k) {
          const double akp = a[k * d + p], akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a[p * d + k], aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
      }
  }
  double mn = a[0];
  for (int i = 1; i < d; ++i) mn = std::min(mn, a[i * d + i]);
  return mn;
}

}  // namespace

double check_ellipticity(const CoefficientModel& model,
                         const std::vector<DiscretePath>& sample_paths) {
  const int d = model.d(), m = model.m();
  double min_eig = std::numeric_limits<double>::infinity();
  for (const DiscretePath& path : sample_paths) {
    for (int l = 0; l <= path.grid.steps; ++l) {
      const CoeffValues cv = model.eval_coeffs(l, path);
      std::vector<double> gram(static_cast<std::size_t>(d) * d, 0.0);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = 0.0;
          for (int r = 0; r < m; ++r) s += cv.sigma[i * m + r] * cv.sigma[j * m + r];
          gram[i * d + j] = s;
        }
      min_eig = std::min(min_eig, min_eigenvalue_sym(gram, d));
    }
  }
  return min_eig;
}

}  // namespace pdm
