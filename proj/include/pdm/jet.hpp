#pragma once

#include <vector>

#include "pdm/wiener.hpp"

namespace pdm {

/// Truncated Taylor expansion of a functional of N variables, carried to
/// `order` (at most 3). Arithmetic on jets propagates exact derivatives, so
/// a formula assembled from jets yields not just its value but the value's
/// own gradient and Hessian with respect to the increments. Dense storage;
/// meant for small variable counts (oracle grids, iterated weights).
class Jet {
public:
  Jet() = default;
  Jet(int vars, int order);

  static Jet constant(int vars, int order, double value);
  static Jet variable(int vars, int order, int index, double value);

  int vars() const { return vars_; }
  int order() const { return order_; }

  double value() const { return value_; }
  double& value() { return value_; }
  double grad(int a) const { return grad_[a]; }
  double& grad(int a) { return grad_[a]; }
  double hess(int a, int b) const { return hess_[static_cast<std::size_t>(a) * vars_ + b]; }
  double& hess(int a, int b) { return hess_[static_cast<std::size_t>(a) * vars_ + b]; }
  double third(int a, int b, int c) const {
    return third_[(static_cast<std::size_t>(a) * vars_ + b) * vars_ + c];
  }
  double& third(int a, int b, int c) {
    return third_[(static_cast<std::size_t>(a) * vars_ + b) * vars_ + c];
  }

  bool is_zero() const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, double s);
  friend Jet operator*(double s, Jet a) { return a * s; }
  friend Jet operator+(Jet a, double s) { a.value_ += s; return a; }
  friend Jet operator+(double s, Jet a) { a.value_ += s; return a; }
  friend Jet operator-(Jet a, double s) { a.value_ -= s; return a; }
  friend Jet operator/(const Jet& a, const Jet& b);

  /// Chain rule through a scalar function given its derivatives at value().
  Jet compose(double f0, double f1, double f2, double f3) const;

  /// Jet of the partial derivative with respect to variable a; drops one
  /// Taylor order.
  Jet partial(int a) const;

  /// Truncate to a lower order (no-op when already lower).
  Jet truncated(int order) const;

private:
  int vars_ = 0;
  int order_ = 0;
  double value_ = 0.0;
  std::vector<double> grad_;
  std::vector<double> hess_;
  std::vector<double> third_;
};

Jet jet_sin(const Jet& x);
Jet jet_cos(const Jet& x);
Jet jet_exp(const Jet& x);
Jet jet_reciprocal(const Jet& x);

/// Vector-valued functional carried as jets, tied to an (n, m) cell layout
/// (variable index = k * m + j).
struct JetFunctional {
  int n = 0;
  int m = 0;
  std::vector<Jet> component;

  int dim() const { return static_cast<int>(component.size()); }
};

/// Collapse jets (order >= 2) to the plain value/gradient/Hessian container.
FunctionalState functional_from_jets(const JetFunctional& f);

}  // namespace pdm
