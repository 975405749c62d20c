#include "pdm/jet.hpp"

#include <cmath>
#include <stdexcept>

namespace pdm {

Jet::Jet(int vars, int order) : vars_(vars), order_(order) {
  if (order < 0 || order > 3) throw std::invalid_argument("Jet: order must be in [0,3]");
  const std::size_t n = static_cast<std::size_t>(vars);
  if (order >= 1) grad_.assign(n, 0.0);
  if (order >= 2) hess_.assign(n * n, 0.0);
  if (order >= 3) third_.assign(n * n * n, 0.0);
}

Jet Jet::constant(int vars, int order, double value) {
  Jet j(vars, order);
  j.value_ = value;
  return j;
}

Jet Jet::variable(int vars, int order, int index, double value) {
  Jet j(vars, order);
  j.value_ = value;
  if (order >= 1) j.grad_[index] = 1.0;
  return j;
}

bool Jet::is_zero() const {
  if (value_ != 0.0) return false;
  for (double v : grad_) if (v != 0.0) return false;
  for (double v : hess_) if (v != 0.0) return false;
  for (double v : third_) if (v != 0.0) return false;
  return true;
}

Jet Jet::operator-() const {
  Jet r = *this;
  r.value_ = -r.value_;
  for (double& v : r.grad_) v = -v;
  for (double& v : r.hess_) v = -v;
  for (double& v : r.third_) v = -v;
  return r;
}

namespace {
int common_order(const Jet& a, const Jet& b) {
  return a.order() < b.order() ? a.order() : b.order();
}
}  // namespace

Jet& Jet::operator+=(const Jet& o) {
  if (vars_ != o.vars_) throw std::invalid_argument("Jet: variable count mismatch");
  *this = truncated(common_order(*this, o));
  value_ += o.value_;
  for (std::size_t i = 0; i < grad_.size(); ++i) grad_[i] += o.grad_[i];
  for (std::size_t i = 0; i < hess_.size(); ++i) hess_[i] += o.hess_[i];
  for (std::size_t i = 0; i < third_.size(); ++i) third_[i] += o.third_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) { return *this += -o; }

Jet operator*(const Jet& a, const Jet& b) {
  if (a.vars_ != b.vars_) throw std::invalid_argument("Jet: variable count mismatch");
  const int n = a.vars_;
  Jet r(n, common_order(a, b));
  r.value_ = a.value_ * b.value_;
  if (r.order_ >= 1)
    for (int i = 0; i < n; ++i) r.grad_[i] = a.grad_[i] * b.value_ + a.value_ * b.grad_[i];
  if (r.order_ >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        r.hess(i, j) = a.hess(i, j) * b.value_ + a.grad_[i] * b.grad_[j] +
                       a.grad_[j] * b.grad_[i] + a.value_ * b.hess(i, j);
  if (r.order_ >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          r.third(i, j, k) = a.third(i, j, k) * b.value_ + b.third(i, j, k) * a.value_ +
                             a.hess(i, j) * b.grad_[k] + a.hess(i, k) * b.grad_[j] +
                             a.hess(j, k) * b.grad_[i] + b.hess(i, j) * a.grad_[k] +
                             b.hess(i, k) * a.grad_[j] + b.hess(j, k) * a.grad_[i];
  return r;
}

Jet operator*(Jet a, double s) {
  a.value_ *= s;
  for (double& v : a.grad_) v *= s;
  for (double& v : a.hess_) v *= s;
  for (double& v : a.third_) v *= s;
  return a;
}

Jet operator/(const Jet& a, const Jet& b) { return a * jet_reciprocal(b); }

Jet Jet::compose(double f0, double f1, double f2, double f3) const {
  const int n = vars_;
  Jet r(n, order_);
  r.value_ = f0;
  if (order_ >= 1)
    for (int i = 0; i < n; ++i) r.grad_[i] = f1 * grad_[i];
  if (order_ >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r.hess(i, j) = f1 * hess(i, j) + f2 * grad_[i] * grad_[j];
  if (order_ >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          r.third(i, j, k) = f1 * third(i, j, k) +
                             f2 * (grad_[i] * hess(j, k) + grad_[j] * hess(i, k) +
                                   grad_[k] * hess(i, j)) +
                             f3 * grad_[i] * grad_[j] * grad_[k];
  return r;
}

Jet Jet::partial(int a) const {
  if (order_ < 1) throw std::invalid_argument("Jet::partial: order 0 carries no gradient");
  const int n = vars_;
  Jet r(n, order_ - 1);
  r.value_ = grad_[a];
  if (r.order_ >= 1)
    for (int i = 0; i < n; ++i) r.grad_[i] = hess(i, a);
  if (r.order_ >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r.hess(i, j) = third(i, j, a);
  return r;
}

Jet Jet::truncated(int order) const {
  if (order >= order_) return *this;
  Jet r(vars_, order);
  r.value_ = value_;
  if (order >= 1) r.grad_ = grad_;
  if (order >= 2) r.hess_ = hess_;
  return r;
}

Jet jet_sin(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  return x.compose(s, c, -s, -c);
}

Jet jet_cos(const Jet& x) {
  const double s = std::sin(x.value()), c = std::cos(x.value());
  return x.compose(c, -s, -c, s);
}

Jet jet_exp(const Jet& x) {
  const double e = std::exp(x.value());
  return x.compose(e, e, e, e);
}

Jet jet_reciprocal(const Jet& x) {
  const double v = x.value();
  if (v == 0.0) throw std::domain_error("jet_reciprocal: division by zero");
  const double inv = 1.0 / v;
  return x.compose(inv, -inv * inv, 2.0 * inv * inv * inv, -6.0 * inv * inv * inv * inv);
}

FunctionalState functional_from_jets(const JetFunctional& f) {
  FunctionalState out;
  const int d = f.dim();
  const int nm = f.n * f.m;
  out.value.resize(d);
  out.grad.assign(d, GradientField(f.n, f.m));
  bool all_second = true;
  for (const Jet& c : f.component) all_second = all_second && c.order() >= 2;
  if (all_second) out.hess.assign(d, HessianField(f.n, f.m));
  for (int i = 0; i < d; ++i) {
    const Jet& c = f.component[i];
    if (c.vars() != nm) throw std::invalid_argument("functional_from_jets: shape mismatch");
    if (c.order() < 1) throw std::invalid_argument("functional_from_jets: gradient missing");
    out.value[i] = c.value();
    for (int a = 0; a < nm; ++a) out.grad[i].data[a] = c.grad(a);
    if (all_second)
      for (int a = 0; a < nm; ++a)
        for (int b = 0; b < nm; ++b)
          out.hess[i].data[static_cast<std::size_t>(a) * nm + b] = c.hess(a, b);
  }
  return out;
}

}  // namespace pdm
