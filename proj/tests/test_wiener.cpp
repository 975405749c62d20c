#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pdm/quadrature.hpp"
#include "pdm/rng.hpp"
#include "pdm/wiener.hpp"

using namespace pdm;

TEST_CASE("grid nodes and eta") {
  const TimeGrid g = make_grid(1.0, 4);
  CHECK(g.dt == doctest::Approx(0.25));
  const std::vector<double> expected = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int k = 0; k <= 4; ++k) CHECK(g.nodes[k] == doctest::Approx(expected[k]));
  CHECK(g.eta(0.3) == doctest::Approx(0.25));
  CHECK(g.eta(1.0) == doctest::Approx(1.0));  // right endpoint maps to itself
  CHECK(g.eta(0.0) == doctest::Approx(0.0));
  CHECK(g.cell_index(0.26) == 1);
  CHECK_THROWS_AS(make_grid(0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1.0, 0), std::invalid_argument);
}

TEST_CASE("grid consistency: dt * n recovers the horizon") {
  for (int n : {1, 3, 7, 100, 511}) {
    const TimeGrid g = make_grid(2.5, n);
    CHECK(g.dt * n == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(g.nodes.front() == 0.0);
    CHECK(g.nodes.back() == 2.5);
    for (int k = 0; k < n; ++k) CHECK(g.nodes[k] < g.nodes[k + 1]);
  }
}

TEST_CASE("increment sampling is a pure function of (seed, index)") {
  const TimeGrid g = make_grid(1.0, 16);
  const IncrementMatrix a = sample_increments(42, 7, g, 2);
  const IncrementMatrix b = sample_increments(42, 7, g, 2);
  CHECK(a.data == b.data);
  const IncrementMatrix c = sample_increments(42, 8, g, 2);
  CHECK(a.data != c.data);
  const IncrementMatrix d = sample_increments(43, 7, g, 2);
  CHECK(a.data != d.data);
}

TEST_CASE("increment moments match N(0, dt) at aggregate level") {
  const TimeGrid g = make_grid(1.0, 4);
  const std::size_t paths = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < paths; ++i) {
    const IncrementMatrix dw = sample_increments(2024, i, g, 1);
    sum += dw.at(0, 0);
    sumsq += dw.at(0, 0) * dw.at(0, 0);
  }
  const double mean = sum / paths;
  const double var = sumsq / paths - mean * mean;
  CHECK(std::abs(mean) < 4.0 * std::sqrt(g.dt / paths));  // CLT band
  CHECK(std::abs(var - g.dt) < 0.05 * g.dt);              // chi-square concentration
}

TEST_CASE("increments across cells are uncorrelated at aggregate level") {
  const TimeGrid g = make_grid(1.0, 4);
  const std::size_t paths = 100000;
  double s01 = 0.0, s12 = 0.0;
  for (std::size_t i = 0; i < paths; ++i) {
    const IncrementMatrix dw = sample_increments(512, i, g, 1);
    s01 += dw.at(0, 0) * dw.at(1, 0);
    s12 += dw.at(1, 0) * dw.at(2, 0);
  }
  const double band = 4.0 * g.dt / std::sqrt(static_cast<double>(paths));
  CHECK(std::abs(s01 / paths) < band);
  CHECK(std::abs(s12 / paths) < band);
}

TEST_CASE("coarsen sums consecutive increments") {
  IncrementMatrix fine(4, 1);
  fine.at(0, 0) = 1.0;
  fine.at(1, 0) = 2.0;
  fine.at(2, 0) = 3.0;
  fine.at(3, 0) = 4.0;
  const IncrementMatrix c2 = coarsen(fine, 2);
  CHECK(c2.n == 2);
  CHECK(c2.at(0, 0) == doctest::Approx(3.0));
  CHECK(c2.at(1, 0) == doctest::Approx(7.0));
  const IncrementMatrix c1 = coarsen(fine, 1);
  CHECK(c1.data == fine.data);
  const IncrementMatrix c4a = coarsen(coarsen(fine, 2), 2);
  const IncrementMatrix c4b = coarsen(fine, 4);
  CHECK(c4a.data == c4b.data);
  CHECK_THROWS_AS(coarsen(fine, 3), std::invalid_argument);
}

TEST_CASE("coarsen preserves the terminal sum") {
  const TimeGrid g = make_grid(1.0, 64);
  const IncrementMatrix fine = sample_increments(5, 0, g, 1);
  const IncrementMatrix coarse = coarsen(fine, 8);
  double sf = 0.0, sc = 0.0;
  for (double v : fine.data) sf += v;
  for (double v : coarse.data) sc += v;
  CHECK(sf == doctest::Approx(sc).epsilon(1e-14));
}

TEST_CASE("malliavin inner product") {
  const TimeGrid g = make_grid(1.0, 8);
  GradientField ones(8, 1);
  for (double& v : ones.data) v = 1.0;
  CHECK(malliavin_inner(ones, ones, g) == doctest::Approx(1.0));  // |D W(T)|^2 = T

  GradientField zero(8, 1);
  CHECK(malliavin_inner(zero, ones, g) == doctest::Approx(0.0));

  const TimeGrid g2 = make_grid(1.0, 2);
  GradientField ramp(2, 1);
  ramp.at(0, 0) = 0.0;
  ramp.at(1, 0) = 0.5;
  CHECK(malliavin_inner(ramp, ramp, g2) == doctest::Approx(0.125));

  GradientField bad(4, 1);
  CHECK_THROWS_AS(malliavin_inner(bad, ones, g), std::invalid_argument);
}

TEST_CASE("malliavin inner is bilinear and positive semi-definite") {
  const TimeGrid g = make_grid(2.0, 16);
  NormalStream rng(7, 0);
  GradientField a(16, 1), b(16, 1), c(16, 1);
  for (int k = 0; k < 16; ++k) {
    a.at(k, 0) = rng.next();
    b.at(k, 0) = rng.next();
    c.at(k, 0) = rng.next();
  }
  const double left = malliavin_inner(a, b, g) + 2.0 * malliavin_inner(a, c, g);
  GradientField bc = b;
  for (int k = 0; k < 16; ++k) bc.at(k, 0) += 2.0 * c.at(k, 0);
  CHECK(malliavin_inner(a, bc, g) == doctest::Approx(left).epsilon(1e-12));
  CHECK(malliavin_inner(a, b, g) == doctest::Approx(malliavin_inner(b, a, g)));
  CHECK(malliavin_inner(a, a, g) >= 0.0);
}

TEST_CASE("skorohod of a deterministic integrand is the Wiener integral") {
  const TimeGrid g = make_grid(1.0, 2);
  IncrementMatrix dw(2, 1);
  dw.at(0, 0) = 0.3;
  dw.at(1, 0) = -0.1;
  CellProcess u = CellProcess::deterministic(2, 1);
  u.value_at(0, 0) = 1.0;
  u.value_at(1, 0) = 1.0;
  CHECK(skorohod(u, dw, g) == doctest::Approx(0.2));
}

TEST_CASE("skorohod trace correction reproduces the second Hermite polynomial") {
  const TimeGrid g = make_grid(1.0, 1);
  IncrementMatrix dw(1, 1);
  dw.at(0, 0) = 0.7;
  CellProcess u = CellProcess::with_gradients(1, 1);
  u.value_at(0, 0) = dw.at(0, 0);
  u.grad_at(0, 0, 0, 0) = 1.0;
  CHECK(skorohod(u, dw, g) == doctest::Approx(0.7 * 0.7 - 1.0));
}

TEST_CASE("skorohod rejects a random integrand without gradients") {
  const TimeGrid g = make_grid(1.0, 2);
  IncrementMatrix dw(2, 1);
  CellProcess u = CellProcess::deterministic(2, 1);
  u.random = true;
  CHECK_THROWS_AS(skorohod(u, dw, g), std::invalid_argument);
}

TEST_CASE("gauss-hermite rule integrates normal moments") {
  const GaussHermiteRule rule = gauss_hermite(20);
  double total = 0.0, second = 0.0, fourth = 0.0, sixth = 0.0;
  for (int i = 0; i < 20; ++i) {
    total += rule.weights[i];
    const double x2 = rule.nodes[i] * rule.nodes[i];
    second += rule.weights[i] * x2;
    fourth += rule.weights[i] * x2 * x2;
    sixth += rule.weights[i] * x2 * x2 * x2;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(second == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fourth == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sixth == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("gh expectation oracle examples") {
  const TimeGrid g1 = make_grid(1.0, 1);
  CHECK(gh_expectation([](const IncrementMatrix& dw) { return dw.at(0, 0) * dw.at(0, 0); }, g1, 1)
        == doctest::Approx(1.0).epsilon(1e-12));

  const TimeGrid g2 = make_grid(1.0, 2);
  CHECK(gh_expectation([](const IncrementMatrix& dw) { return std::exp(dw.at(0, 0) + dw.at(1, 0)); },
                       g2, 1, 24)
        == doctest::Approx(std::exp(0.5)).epsilon(1e-10));

  const TimeGrid gh4 = make_grid(0.5, 1);
  CHECK(gh_expectation([](const IncrementMatrix& dw) {
          const double x = dw.at(0, 0);
          return x * x * x * x;
        }, gh4, 1)
        == doctest::Approx(0.75).epsilon(1e-12));

  const TimeGrid g5 = make_grid(1.0, 5);
  auto zero_fn = [](const IncrementMatrix&) { return 0.0; };
  CHECK_THROWS_AS(gh_expectation(zero_fn, g5, 1), std::invalid_argument);
}

TEST_CASE("exact duality between gradient pairing and divergence") {
  // For polynomial F (degree <= 4) and polynomial u (degree <= 3) the
  // discretized integration by parts E<DF,u> = E[F delta(u)] is an identity;
  // both sides are evaluated with the quadrature oracle.
  const TimeGrid g = make_grid(1.0, 3);
  const int nm = 3;

  auto f_value = [](const IncrementMatrix& dw) {
    const double w = dw.at(0, 0) + dw.at(1, 0) + dw.at(2, 0);
    return w * w + 0.3 * dw.at(1, 0) * dw.at(1, 0) * dw.at(1, 0) * dw.at(1, 0);
  };
  auto f_grad = [](const IncrementMatrix& dw, int k) {
    const double w = dw.at(0, 0) + dw.at(1, 0) + dw.at(2, 0);
    double gk = 2.0 * w;
    if (k == 1) gk += 1.2 * dw.at(1, 0) * dw.at(1, 0) * dw.at(1, 0);
    return gk;
  };
  auto u_value = [](const IncrementMatrix& dw, int k) {
    if (k == 0) return 1.0;
    if (k == 1) return dw.at(0, 0);
    return dw.at(2, 0) * dw.at(2, 0) * dw.at(2, 0);
  };
  auto u_grad_kk = [](const IncrementMatrix& dw, int k) {
    if (k == 2) return 3.0 * dw.at(2, 0) * dw.at(2, 0);
    return 0.0;
  };

  auto lhs_fn = [&](const IncrementMatrix& dw) {
    double s = 0.0;
    for (int k = 0; k < nm; ++k) s += f_grad(dw, k) * u_value(dw, k);
    return s * g.dt;
  };
  auto rhs_fn = [&](const IncrementMatrix& dw) {
    double ito = 0.0, trace = 0.0;
    for (int k = 0; k < nm; ++k) {
      ito += u_value(dw, k) * dw.at(k, 0);
      trace += u_grad_kk(dw, k);
    }
    return f_value(dw) * (ito - g.dt * trace);
  };
  const double lhs = gh_expectation(lhs_fn, g, 1, 16);
  const double rhs = gh_expectation(rhs_fn, g, 1, 16);
  CHECK(std::abs(lhs - rhs) < 1e-8);
}

TEST_CASE("duality matrix over polynomial pairs") {
  // E<DF,u>_H = E[F delta(u)] for a spread of polynomial functionals
  // (degree <= 4) and integrands (degree <= 3) on a two-cell grid.
  const TimeGrid g = make_grid(1.0, 2);

  struct Fn {
    std::function<double(double, double)> value;
    std::function<double(double, double, int)> grad;
  };
  const std::vector<Fn> functionals = {
      {[](double a, double b) { return a + b; }, [](double, double, int) { return 1.0; }},
      {[](double a, double b) { return a * a * b * b; },
       [](double a, double b, int k) { return k == 0 ? 2.0 * a * b * b : 2.0 * a * a * b; }},
      {[](double a, double b) { return a * a * a * a + b; },
       [](double a, double, int k) { return k == 0 ? 4.0 * a * a * a : 1.0; }},
  };
  struct Un {
    std::function<double(double, double, int)> value;
    std::function<double(double, double, int)> self_grad;  // du_k / dxi_k
  };
  const std::vector<Un> integrands = {
      {[](double, double, int) { return 1.0; }, [](double, double, int) { return 0.0; }},
      {[](double a, double b, int k) { return k == 0 ? b : a; },
       [](double, double, int) { return 0.0; }},
      {[](double a, double b, int k) { return k == 0 ? a * a * a : a * b; },
       [](double a, double, int k) { return k == 0 ? 3.0 * a * a : a; }},
  };

  for (const Fn& f : functionals)
    for (const Un& u : integrands) {
      auto lhs_fn = [&](const IncrementMatrix& dw) {
        const double a = dw.at(0, 0), b = dw.at(1, 0);
        return (f.grad(a, b, 0) * u.value(a, b, 0) + f.grad(a, b, 1) * u.value(a, b, 1)) * g.dt;
      };
      auto rhs_fn = [&](const IncrementMatrix& dw) {
        const double a = dw.at(0, 0), b = dw.at(1, 0);
        const double div = u.value(a, b, 0) * a + u.value(a, b, 1) * b -
                           g.dt * (u.self_grad(a, b, 0) + u.self_grad(a, b, 1));
        return f.value(a, b) * div;
      };
      const double lhs = gh_expectation(lhs_fn, g, 1, 16);
      const double rhs = gh_expectation(rhs_fn, g, 1, 16);
      CHECK(std::abs(lhs - rhs) < 1e-8);
    }
}

TEST_CASE("duality with two noise directions") {
  // One cell, two noise columns; u mixes the directions.
  const TimeGrid g = make_grid(0.5, 1);
  auto lhs_fn = [&](const IncrementMatrix& dw) {
    const double a = dw.at(0, 0), b = dw.at(0, 1);
    // F = a^2 b, u = (b, a^2)
    return (2.0 * a * b * b + a * a * a * a) * g.dt;
  };
  auto rhs_fn = [&](const IncrementMatrix& dw) {
    const double a = dw.at(0, 0), b = dw.at(0, 1);
    CellProcess u = CellProcess::with_gradients(1, 2);
    u.value_at(0, 0) = b;
    u.value_at(0, 1) = a * a;
    u.grad_at(0, 0, 0, 1) = 1.0;      // d b / d xi_01 reported off-diagonal
    u.grad_at(0, 1, 0, 0) = 2.0 * a;  // d a^2 / d xi_00
    return a * a * b * skorohod(u, dw, g);
  };
  const double lhs = gh_expectation(lhs_fn, g, 2, 16);
  const double rhs = gh_expectation(rhs_fn, g, 2, 16);
  CHECK(std::abs(lhs - rhs) < 1e-8);
}

TEST_CASE("divergence of a cubed increment integrand has zero mean") {
  const TimeGrid g = make_grid(1.0, 2);
  auto fn = [&](const IncrementMatrix& dw) {
    CellProcess u = CellProcess::with_gradients(2, 1);
    for (int k = 0; k < 2; ++k) {
      const double x = dw.at(k, 0);
      u.value_at(k, 0) = x * x * x;
      u.grad_at(k, 0, k, 0) = 3.0 * x * x;
    }
    return skorohod(u, dw, g);
  };
  CHECK(std::abs(gh_expectation(fn, g, 1, 20)) < 1e-10);
}
