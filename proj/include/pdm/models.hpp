#pragma once

#include <map>
#include <utility>
#include <vector>

#include "pdm/wiener.hpp"

namespace pdm {

/// Grid values of a trajectory with piecewise linear evaluation between
/// nodes and constant continuation before time zero.
struct DiscretePath {
  TimeGrid grid;
  int dim = 1;
  std::vector<double> values;  // (n+1) x dim

  DiscretePath() = default;
  DiscretePath(const TimeGrid& g, int d)
      : grid(g), dim(d), values(static_cast<std::size_t>(g.steps + 1) * d, 0.0) {}

  double& at(int k, int i = 0) { return values[static_cast<std::size_t>(k) * dim + i]; }
  double at(int k, int i = 0) const { return values[static_cast<std::size_t>(k) * dim + i]; }

  double eval(double s, int i = 0) const;
};

/// Smooth two-feature coefficient family
///   f(u, v) = c + lu*u + lv*v + su*sin(u) + cv*cos(v) + sc*sin(u)*cos(v),
/// rich enough to express every built-in model while keeping all partial
/// derivatives analytic.
struct CoeffFamily {
  double c = 0.0;
  double lin_u = 0.0;
  double lin_v = 0.0;
  double sin_u = 0.0;
  double cos_v = 0.0;
  double sin_u_cos_v = 0.0;

  struct Derivs {
    double f, fu, fv, fuu, fuv, fvv;
  };
  Derivs eval(double u, double v) const;

  double derivative_bound_u() const;
  double derivative_bound_v() const;
  double constant_bound() const;
};

enum class ModelKind { constant, markovian, delay, distributed_delay };

/// How the first feature u consults the past trajectory. The second feature
/// v is always the current value x(t).
enum class UFeature { none, current, lag, integral };

struct FeatureWeights {
  // (grid index, weight) pairs; empty for UFeature::none or an empty
  // integral window.
  std::vector<std::pair<int, double>> terms;
};

struct CoeffValues {
  std::vector<double> sigma;  // d x m, row-major
  std::vector<double> drift;  // d
};

/// Per-grid-index partial derivatives of the (scalar) coefficients.
struct CoeffPartial {
  double dsigma = 0.0;
  double ddrift = 0.0;
};

using CoeffGradients = std::map<int, CoeffPartial>;
using CoeffHessians = std::map<std::pair<int, int>, CoeffPartial>;

/// A built-in coefficient model. The constant model supports arbitrary
/// (d, m); the featured families are scalar (d = m = 1).
class CoefficientModel {
public:
  static CoefficientModel constant(std::vector<double> sigma, std::vector<double> drift,
                                   int d, int m, double ellipticity_floor);
  static CoefficientModel markovian(CoeffFamily sigma, CoeffFamily drift,
                                    double ellipticity_floor);
  static CoefficientModel delay(CoeffFamily sigma, CoeffFamily drift, double lag,
                                double ellipticity_floor);
  static CoefficientModel distributed_delay(CoeffFamily sigma, CoeffFamily drift,
                                            double ellipticity_floor);

  ModelKind kind() const { return kind_; }
  int d() const { return d_; }
  int m() const { return m_; }
  double lag() const { return tau_; }
  double ellipticity_floor() const { return floor_; }
  UFeature u_feature() const { return u_feature_; }
  const CoeffFamily& sigma_family() const { return sigma_family_; }
  const CoeffFamily& drift_family() const { return drift_family_; }

  /// Coefficients frozen at grid time t_index on the path stopped there;
  /// values past t_index are never consulted.
  CoeffValues eval_coeffs(int t_index, const DiscretePath& path) const;

  /// Feature values (u, v) at grid time t_index.
  std::pair<double, double> features(int t_index, const DiscretePath& path) const;

  /// Grid-index weights through which u consults the path at t_index.
  FeatureWeights u_weights(int t_index, const TimeGrid& grid) const;

  /// Nonzero partials of sigma and b with respect to consulted grid values.
  CoeffGradients coeff_gradients(int t_index, const DiscretePath& path) const;

  /// Symmetric sparse second partials.
  CoeffHessians coeff_hessians(int t_index, const DiscretePath& path) const;

  /// Reported Lipschitz constant in the sup norm of the path argument.
  double lipschitz_constant(double horizon) const;
  /// Reported linear-growth constant.
  double growth_constant(double horizon) const;

private:
  CoefficientModel() = default;

  void require_featured() const;

  ModelKind kind_ = ModelKind::constant;
  int d_ = 1;
  int m_ = 1;
  double tau_ = 0.0;
  double floor_ = 0.0;
  UFeature u_feature_ = UFeature::none;
  std::vector<double> sigma0_;
  std::vector<double> drift0_;
  CoeffFamily sigma_family_;
  CoeffFamily drift_family_;
};

/// Empirical minimum over paths and grid times of the smallest eigenvalue
/// of sigma sigma*.
double check_ellipticity(const CoefficientModel& model,
                         const std::vector<DiscretePath>& sample_paths);

}  // namespace pdm
