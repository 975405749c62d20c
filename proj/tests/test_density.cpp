#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pdm/density.hpp"
#include "pdm/errors.hpp"
#include "pdm/euler.hpp"
#include "pdm/rng.hpp"

using namespace pdm;

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * 3.141592653589793 * var);
}

CoefficientModel markov_model() {
  CoeffFamily sigma;
  sigma.c = 1.0;
  sigma.sin_u = 0.25;
  CoeffFamily drift;
  drift.cos_v = 0.25;
  return CoefficientModel::markovian(sigma, drift, 0.5625);
}

}  // namespace

TEST_CASE("ibp density of a Gaussian endpoint") {
  // F = x0 + s0 W(1); the weight is W / s0; compare against the analytic
  // normal density on a grid of query points.
  const double x0 = 0.4, s0 = 0.8;
  const std::size_t n = 100000;
  std::vector<std::pair<double, double>> samples(n);
  NormalStream rng(2027, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.next();
    samples[i] = {x0 + s0 * w, w / s0};
  }
  std::vector<double> query;
  for (int q = -10; q <= 10; ++q) query.push_back(x0 + 0.35 * q);
  const DensityEstimate est = ibp_density(samples, query);
  for (std::size_t q = 0; q < query.size(); ++q) {
    const double truth = normal_pdf(query[q], x0, s0 * s0);
    CHECK(std::abs(est.value[q] - truth) <= 3.5 * est.stderr_[q] + 1e-4);
  }
  // Beyond the largest sample the indicator empties out exactly.
  const DensityEstimate far = ibp_density(samples, {x0 + 100.0});
  CHECK(far.value[0] == 0.0);

  CHECK_THROWS_AS(ibp_density({}, query), std::invalid_argument);
}

TEST_CASE("ibp density recomputation identity between neighbouring points") {
  // Estimates at y1 < y2 differ exactly by the samples that fall in
  // (y1, y2]; recomputing the difference from scratch gives the same value.
  const std::size_t n = 5000;
  std::vector<std::pair<double, double>> samples(n);
  NormalStream rng(5, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.next();
    samples[i] = {w, w};
  }
  const double y1 = -0.3, y2 = 0.4;
  const DensityEstimate est = ibp_density(samples, {y1, y2});
  double gap = 0.0;
  for (const auto& [f, h] : samples)
    if (f > y1 && f <= y2) gap += h;
  gap /= static_cast<double>(n);
  CHECK(est.value[0] - est.value[1] == doctest::Approx(gap).epsilon(1e-12));
}

TEST_CASE("kernel density on an explicit two-point sample") {
  // Bandwidth 0.5 on {-1, 1} at y = 0: each kernel contributes phi(2)/0.5.
  std::vector<double> samples;
  for (int i = 0; i < 50; ++i) {
    samples.push_back(-1.0);
    samples.push_back(1.0);
  }
  const DensityEstimate est = kernel_density(samples, {0.0}, 0.5);
  const double phi2 = kInvSqrt2Pi * std::exp(-2.0);
  CHECK(est.value[0] == doctest::Approx(2.0 * phi2).epsilon(1e-12));
}

TEST_CASE("kernel density estimates the standard normal") {
  const std::size_t n = 200000;
  std::vector<double> samples(n);
  NormalStream rng(2028, 0);
  for (double& s : samples) s = rng.next();
  const DensityEstimate est = kernel_density(samples, {0.0});
  CHECK(est.value[0] == doctest::Approx(kInvSqrt2Pi).epsilon(0.01));

  // Split-sample consistency within a joint band.
  std::vector<double> a(samples.begin(), samples.begin() + n / 2);
  std::vector<double> b(samples.begin() + n / 2, samples.end());
  const DensityEstimate ea = kernel_density(a, {0.0});
  const DensityEstimate eb = kernel_density(b, {0.0});
  const double joint = std::sqrt(ea.stderr_[0] * ea.stderr_[0] + eb.stderr_[0] * eb.stderr_[0]);
  CHECK(std::abs(ea.value[0] - eb.value[0]) <= 3.0 * joint + 1e-3);

  CHECK_THROWS_AS(kernel_density({1.0, 2.0}, {0.0}), std::invalid_argument);
  std::vector<double> flat(200, 1.0);
  CHECK_THROWS_AS(kernel_density(flat, {0.0}), std::invalid_argument);
}

TEST_CASE("holder norm examples") {
  std::vector<double> ramp;
  for (int i = 0; i <= 10; ++i) ramp.push_back(i / 10.0);
  const HolderNormResult r = holder_norm(ramp, 0.1, 0.5);
  CHECK(r.sup_term == doctest::Approx(1.0));
  CHECK(r.quotient_term == doctest::Approx(1.0));
  CHECK(r.total == doctest::Approx(2.0));

  std::vector<double> flat(8, -2.5);
  const HolderNormResult rf = holder_norm(flat, 0.3, 0.4);
  CHECK(rf.total == doctest::Approx(2.5));

  // beta = 0: the quotient is just the largest pairwise difference.
  std::vector<double> vee = {1.0, -1.0, 0.5};
  const HolderNormResult r0 = holder_norm(vee, 1.0, 0.0);
  CHECK(r0.sup_term == doctest::Approx(1.0));
  CHECK(r0.quotient_term == doctest::Approx(2.0));

  CHECK_THROWS_AS(holder_norm(ramp, 0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(holder_norm({1.0}, 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("holder norm grows with beta on a fine grid") {
  std::vector<double> values;
  NormalStream rng(3, 3);
  for (int i = 0; i < 30; ++i) values.push_back(rng.next());
  double prev = holder_norm(values, 0.01, 0.0).total;
  for (double beta : {0.2, 0.4, 0.6, 0.8}) {
    const double cur = holder_norm(values, 0.01, beta).total;
    CHECK(cur >= prev - 1e-12);
    prev = cur;
  }
}

TEST_CASE("density rate study: constant model is exact under common noise") {
  const CoefficientModel c = CoefficientModel::constant({1.0}, {0.2}, 1, 1, 1.0);
  DensityStudyConfig cfg;
  cfg.levels = {1, 2};
  cfg.reference_level = 3;
  cfg.num_paths = 2000;
  cfg.seed = 77;
  cfg.workers = 1;
  cfg.second_variation_cap = 64;
  const DensityRateResult res = density_rate_study(c, {0.0}, 1.0, cfg);
  REQUIRE(res.ibp_tables.size() == 1);
  CHECK(res.ibp_tables[0].second.exact);
  CHECK(res.degenerate_samples == 0);
}

TEST_CASE("density rate study: errors shrink for the markovian model") {
  DensityStudyConfig cfg;
  cfg.levels = {1, 2};
  cfg.reference_level = 3;
  cfg.num_paths = 20000;
  cfg.seed = 99;
  cfg.workers = 1;
  cfg.method = DensityMethod::both;
  const DensityRateResult res = density_rate_study(markov_model(), {0.0}, 1.0, cfg);
  REQUIRE(res.ibp_tables.size() == 1);
  const RateTable& t = res.ibp_tables[0].second;
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].error > t.rows[1].error);
  CHECK(res.degenerate_samples == 0);
  // Both estimators agree on their common smoothed target at every query
  // point: the per-sample gap is centred, so the worst z is plain noise.
  CHECK(res.agreement_z >= 0.0);
  CHECK(res.agreement_z <= 3.0);
  // Trapezoid mass over the query window is close to one. The kernel
  // estimate carries far less integral noise than the tail-weight form at
  // this sample size, so it is the instrument here.
  double mass = 0.0;
  const double spacing = res.query[1] - res.query[0];
  for (std::size_t q = 0; q + 1 < res.query.size(); ++q)
    mass += 0.5 * spacing * (res.kernel_reference.value[q] + res.kernel_reference.value[q + 1]);
  CHECK(mass > 0.95);
  CHECK(mass < 1.01);
}

TEST_CASE("density rate study refuses an over-cap ibp request") {
  DensityStudyConfig cfg;
  cfg.levels = {1, 2, 3};
  cfg.reference_level = 4;  // 256 steps
  cfg.num_paths = 500;
  cfg.second_variation_cap = 64;
  cfg.method = DensityMethod::ibp;
  CHECK_THROWS_WITH_AS(density_rate_study(markov_model(), {0.0}, 1.0, cfg),
                       doctest::Contains("cap"), InfeasibleError);
  cfg.method = DensityMethod::kernel;
  CHECK_NOTHROW(density_rate_study(markov_model(), {0.0}, 1.0, cfg));
}

TEST_CASE("localized density difference on identical and shifted pairs") {
  const std::size_t n = 20000;
  std::vector<PairedSample> same(n);
  NormalStream rng(7, 7);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.next();
    same[i] = {w, w, 1.0};
  }
  std::vector<double> query;
  for (int q = -20; q <= 20; ++q) query.push_back(0.2 * q);
  const LocalizedDiffRow zero = localized_density_difference(same, 0.0, query);
  CHECK(zero.strong_distance == doctest::Approx(0.0));
  CHECK(zero.cbeta_weighted == doctest::Approx(0.0));
  CHECK(zero.ratio == doctest::Approx(0.0));

  // Deterministic shift: the C0 gap approximates eps * max |p'|.
  const double eps = 0.05;
  std::vector<PairedSample> shifted = same;
  for (PairedSample& s : shifted) s.f2 = s.f1 + eps;
  const LocalizedDiffRow row = localized_density_difference(shifted, 0.0, query);
  CHECK(row.strong_distance == doctest::Approx(eps).epsilon(1e-9));
  // max |p'| for the standard normal is phi(1) = 0.2420; the kernel-based
  // gap carries smoothing and Monte Carlo error, so compare loosely.
  const double predicted = eps * 0.24197072451914337;
  CHECK(row.cbeta_unweighted == doctest::Approx(predicted).epsilon(0.30));
}

TEST_CASE("localized ladder: fractions fall and the self-level statistic vanishes") {
  CoeffFamily sigma;
  sigma.c = 1.0;
  sigma.sin_u = 0.45;
  CoeffFamily drift;
  drift.cos_v = 0.25;
  const CoefficientModel model = CoefficientModel::delay(sigma, drift, 0.25, 0.3025);

  LocalizedLadderConfig cfg;
  cfg.fine_steps = 128;
  cfg.coarse_steps = {4, 16, 64, 128};
  cfg.num_paths = 2000;
  cfg.seed = 31;
  cfg.workers = 1;
  const LocalizedLadderResult res = localized_ladder_study(model, {0.1}, 1.0, cfg);
  REQUIRE(res.rows.size() == 4);
  CHECK(res.rows[0].frac_active >= res.rows[1].frac_active);
  CHECK(res.rows[1].frac_active >= res.rows[2].frac_active);
  // The last rung compares the fine scheme with itself: R = 0 identically.
  CHECK(res.rows[3].frac_active == doctest::Approx(0.0));
  CHECK(res.rows[3].strong_distance == doctest::Approx(0.0));
}
