#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pdm/models.hpp"
#include "pdm/rng.hpp"

using namespace pdm;

namespace {

CoefficientModel markov_sin() {
  CoeffFamily sigma;
  sigma.c = 1.0;
  sigma.sin_u = 0.25;
  CoeffFamily drift;
  return CoefficientModel::markovian(sigma, drift, 0.5);
}

CoefficientModel delay_benchmark(double tau) {
  // sigma(u, v) = 1 + 0.25 sin u, b(u, v) = 0.25 cos v with u the lagged value.
  CoeffFamily sigma;
  sigma.c = 1.0;
  sigma.sin_u = 0.25;
  CoeffFamily drift;
  drift.cos_v = 0.25;
  return CoefficientModel::delay(sigma, drift, tau, 0.5);
}

DiscretePath random_path(const TimeGrid& grid, std::uint64_t seed, double scale = 0.8) {
  DiscretePath p(grid, 1);
  NormalStream rng(seed, 0);
  p.at(0) = rng.next() * scale;
  for (int k = 1; k <= grid.steps; ++k)
    p.at(k) = p.at(k - 1) + scale * rng.next() * std::sqrt(grid.dt);
  return p;
}

double sigma_of_bumped(const CoefficientModel& m, int t_index, DiscretePath path, int s, double h) {
  path.at(s) += h;
  return m.eval_coeffs(t_index, path).sigma[0];
}

double drift_of_bumped(const CoefficientModel& m, int t_index, DiscretePath path, int s, double h) {
  path.at(s) += h;
  return m.eval_coeffs(t_index, path).drift[0];
}

}  // namespace

TEST_CASE("path evaluation: linear interpolation and constant pre-history") {
  const TimeGrid g = make_grid(1.0, 4);
  DiscretePath p(g, 1);
  for (int k = 0; k <= 4; ++k) p.at(k) = k * 1.0;
  CHECK(p.eval(0.375) == doctest::Approx(1.5));
  CHECK(p.eval(-3.0) == doctest::Approx(0.0));
  CHECK(p.eval(2.0) == doctest::Approx(4.0));
  CHECK(p.eval(0.25) == doctest::Approx(1.0));
}

TEST_CASE("coefficient evaluation examples") {
  const TimeGrid g = make_grid(1.0, 8);
  DiscretePath zero(g, 1);

  const CoefficientModel markov = markov_sin();
  CHECK(markov.eval_coeffs(3, zero).sigma[0] == doctest::Approx(1.0));  // sin 0 = 0

  const CoefficientModel delay = delay_benchmark(0.25);
  DiscretePath p(g, 1);
  for (int k = 0; k <= 8; ++k) p.at(k) = 0.3 * k;
  // Before the lag horizon the u feature reads the constant pre-history x(0).
  const auto [u_early, v_early] = delay.features(1, p);
  CHECK(u_early == doctest::Approx(p.at(0)));
  CHECK(v_early == doctest::Approx(p.at(1)));
  CHECK(delay.eval_coeffs(1, zero).sigma[0] == doctest::Approx(1.0));

  const CoefficientModel constant = CoefficientModel::constant({1.5}, {0.25}, 1, 1, 1.0);
  CHECK(constant.eval_coeffs(0, zero).sigma[0] == doctest::Approx(1.5));
  CHECK(constant.eval_coeffs(5, p).sigma[0] == doctest::Approx(1.5));
  CHECK(constant.eval_coeffs(5, p).drift[0] == doctest::Approx(0.25));

  CHECK_THROWS_AS(markov.eval_coeffs(9, zero), std::invalid_argument);
}

TEST_CASE("adaptedness: values after t_index are never consulted") {
  const TimeGrid g = make_grid(1.0, 8);
  const CoefficientModel models[] = {
      markov_sin(), delay_benchmark(0.3),
      CoefficientModel::distributed_delay(markov_sin().sigma_family(),
                                          markov_sin().drift_family(), 0.5)};
  for (const CoefficientModel& m : models) {
    DiscretePath p = random_path(g, 11);
    const int t_index = 5;
    const CoeffValues before = m.eval_coeffs(t_index, p);
    p.at(6) += 10.0;
    p.at(8) -= 3.0;
    const CoeffValues after = m.eval_coeffs(t_index, p);
    CHECK(before.sigma[0] == after.sigma[0]);
    CHECK(before.drift[0] == after.drift[0]);
  }
}

TEST_CASE("gradient examples") {
  const TimeGrid g = make_grid(1.0, 8);
  DiscretePath zero(g, 1);

  const CoeffGradients gm = markov_sin().coeff_gradients(4, zero);
  CHECK(gm.size() == 1);
  CHECK(gm.at(4).dsigma == doctest::Approx(0.25));  // 0.25 cos 0

  const CoefficientModel constant = CoefficientModel::constant({1.0}, {0.0}, 1, 1, 0.0);
  CHECK(constant.coeff_gradients(4, zero).empty());

  // Lag a whole number of cells: support is exactly {t - tau, t}.
  const CoefficientModel delay = delay_benchmark(0.25);
  const CoeffGradients gd = delay.coeff_gradients(6, zero);
  CHECK(gd.size() == 2);
  CHECK(gd.count(4) == 1);
  CHECK(gd.count(6) == 1);
}

TEST_CASE("gradients match central finite differences on random probes") {
  const TimeGrid g = make_grid(1.0, 16);
  const CoefficientModel models[] = {
      markov_sin(), delay_benchmark(0.3),
      CoefficientModel::distributed_delay(delay_benchmark(0.3).sigma_family(),
                                          delay_benchmark(0.3).drift_family(), 0.5)};
  const double h = 1e-5;
  for (const CoefficientModel& m : models) {
    for (int probe = 0; probe < 100; ++probe) {
      const DiscretePath p = random_path(g, 100 + probe);
      const int t_index = 2 + probe % 14;
      const CoeffGradients grads = m.coeff_gradients(t_index, p);
      for (const auto& [s, partial] : grads) {
        const double fd_sigma =
            (sigma_of_bumped(m, t_index, p, s, h) - sigma_of_bumped(m, t_index, p, s, -h)) /
            (2.0 * h);
        const double fd_drift =
            (drift_of_bumped(m, t_index, p, s, h) - drift_of_bumped(m, t_index, p, s, -h)) /
            (2.0 * h);
        CHECK(partial.dsigma == doctest::Approx(fd_sigma).epsilon(1e-6));
        CHECK(partial.ddrift == doctest::Approx(fd_drift).epsilon(1e-6));
      }
      // Indices outside the reported support carry no derivative.
      for (int s = 0; s <= t_index; ++s) {
        if (grads.count(s)) continue;
        const double fd =
            (sigma_of_bumped(m, t_index, p, s, h) - sigma_of_bumped(m, t_index, p, s, -h)) /
            (2.0 * h);
        CHECK(std::abs(fd) < 1e-9);
      }
    }
  }
}

TEST_CASE("hessian examples") {
  const TimeGrid g = make_grid(1.0, 8);
  DiscretePath zero(g, 1);

  CHECK(CoefficientModel::constant({1.0}, {0.0}, 1, 1, 0.0).coeff_hessians(4, zero).empty());

  const CoeffHessians hm = markov_sin().coeff_hessians(4, zero);
  CHECK(hm.at({4, 4}).dsigma == doctest::Approx(0.0));  // -0.25 sin 0

  // sigma(u, v) = 1 + 0.2 sin(u) cos(v)
  CoeffFamily cross;
  cross.c = 1.0;
  cross.sin_u_cos_v = 0.2;
  const CoefficientModel delay = CoefficientModel::delay(cross, CoeffFamily{}, 0.25, 0.0);
  DiscretePath p(g, 1);
  const CoeffHessians h0 = delay.coeff_hessians(6, p);
  CHECK(h0.at({4, 6}).dsigma == doctest::Approx(0.0));  // -0.2 cos(0) sin(0)

  for (int k = 0; k <= 8; ++k) p.at(k) = 1.5707963267948966;  // v = pi/2
  p.at(4) = 0.0;                                              // u = 0 at the lag node
  const CoeffHessians h1 = delay.coeff_hessians(6, p);
  CHECK(h1.at({4, 6}).dsigma == doctest::Approx(-0.2));
}

TEST_CASE("hessians match finite differences on random probes") {
  const TimeGrid g = make_grid(1.0, 12);
  const CoefficientModel models[] = {
      markov_sin(), delay_benchmark(0.21),
      CoefficientModel::distributed_delay(delay_benchmark(0.3).sigma_family(),
                                          delay_benchmark(0.3).drift_family(), 0.5)};
  const double h = 1e-3;
  for (const CoefficientModel& m : models) {
    for (int probe = 0; probe < 40; ++probe) {
      const DiscretePath p = random_path(g, 500 + probe);
      const int t_index = 3 + probe % 9;
      const CoeffHessians hess = m.coeff_hessians(t_index, p);
      for (const auto& [key, partial] : hess) {
        const auto [s1, s2] = key;
        double fd;
        if (s1 == s2) {
          fd = (sigma_of_bumped(m, t_index, p, s1, h) - 2.0 * m.eval_coeffs(t_index, p).sigma[0] +
                sigma_of_bumped(m, t_index, p, s1, -h)) /
               (h * h);
        } else {
          DiscretePath pp = p, pm = p, mp = p, mm = p;
          pp.at(s1) += h;
          pp.at(s2) += h;
          pm.at(s1) += h;
          pm.at(s2) -= h;
          mp.at(s1) -= h;
          mp.at(s2) += h;
          mm.at(s1) -= h;
          mm.at(s2) -= h;
          fd = (m.eval_coeffs(t_index, pp).sigma[0] - m.eval_coeffs(t_index, pm).sigma[0] -
                m.eval_coeffs(t_index, mp).sigma[0] + m.eval_coeffs(t_index, mm).sigma[0]) /
               (4.0 * h * h);
        }
        CHECK(partial.dsigma == doctest::Approx(fd).epsilon(2e-4).scale(1.0));
      }
    }
  }
}

TEST_CASE("ellipticity floor checks") {
  const TimeGrid g = make_grid(1.0, 16);
  std::vector<DiscretePath> paths;
  for (int i = 0; i < 30; ++i) paths.push_back(random_path(g, 900 + i, 1.5));

  const double markov_min = check_ellipticity(markov_sin(), paths);
  CHECK(markov_min >= 0.5625);  // (1 - 0.25)^2
  CHECK(markov_min >= markov_sin().ellipticity_floor());

  const CoefficientModel degenerate = CoefficientModel::constant({0.0}, {1.0}, 1, 1, 0.0);
  CHECK(check_ellipticity(degenerate, paths) == doctest::Approx(0.0));

  CoeffFamily two_term;
  two_term.c = 1.0;
  two_term.sin_u = 0.2;
  two_term.cos_v = 0.2;
  const CoefficientModel delay2 = CoefficientModel::delay(two_term, CoeffFamily{}, 0.25, 0.36);
  CHECK(check_ellipticity(delay2, paths) >= 0.36);  // (1 - 0.4)^2
}

TEST_CASE("reported lipschitz constant bounds coefficient differences") {
  const TimeGrid g = make_grid(1.0, 16);
  const CoefficientModel models[] = {
      markov_sin(), delay_benchmark(0.3),
      CoefficientModel::distributed_delay(delay_benchmark(0.3).sigma_family(),
                                          delay_benchmark(0.3).drift_family(), 0.5)};
  for (const CoefficientModel& m : models) {
    const double c0 = m.lipschitz_constant(g.horizon);
    CHECK(c0 > 0.0);
    for (int probe = 0; probe < 50; ++probe) {
      const DiscretePath a = random_path(g, 1200 + probe);
      const DiscretePath b = random_path(g, 4200 + probe);
      double sup = 0.0;
      for (int k = 0; k <= g.steps; ++k) sup = std::max(sup, std::abs(a.at(k) - b.at(k)));
      const int t_index = 2 + probe % 14;
      const double ds =
          std::abs(m.eval_coeffs(t_index, a).sigma[0] - m.eval_coeffs(t_index, b).sigma[0]);
      const double db =
          std::abs(m.eval_coeffs(t_index, a).drift[0] - m.eval_coeffs(t_index, b).drift[0]);
      CHECK(ds <= c0 * sup + 1e-12);
      CHECK(db <= c0 * sup + 1e-12);
    }
  }
}

TEST_CASE("distributed delay time regularity enters through the running integral") {
  // The u feature moves by at most dt * sup|phi| between neighbouring grid
  // times, which is what keeps the scheme's time increments square-root
  // regular for this model.
  CoeffFamily fam;
  fam.c = 1.0;
  fam.sin_u = 0.3;
  const CoefficientModel m = CoefficientModel::distributed_delay(fam, CoeffFamily{}, 0.0);
  const TimeGrid g = make_grid(1.0, 32);
  const DiscretePath p = random_path(g, 31);
  double sup = 0.0;
  for (int k = 0; k <= g.steps; ++k) sup = std::max(sup, std::abs(p.at(k)));
  for (int l = 1; l < 32; ++l) {
    const auto [u1, v1] = m.features(l, p);
    const auto [u0, v0] = m.features(l - 1, p);
    CHECK(std::abs(u1 - u0) <= g.dt * sup + 1e-12);
    (void)v0;
    (void)v1;
  }
}
