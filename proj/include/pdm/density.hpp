#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdm/models.hpp"
#include "pdm/rate.hpp"

namespace pdm {

struct DensityEstimate {
  std::vector<double> query;
  std::vector<double> value;
  std::vector<double> stderr_;
  std::string method;  // "ibp" or "kernel"
};

/// Tail-weight estimator p(y) = mean of 1{F > y} H over (value, weight)
/// samples; bandwidth-free, may go slightly negative within noise.
DensityEstimate ibp_density(const std::vector<std::pair<double, double>>& samples,
                            const std::vector<double>& query);

/// Gaussian kernel estimator; bandwidth defaults to Silverman's rule.
DensityEstimate kernel_density(const std::vector<double>& samples,
                               const std::vector<double>& query,
                               std::optional<double> bandwidth = std::nullopt);

struct HolderNormResult {
  double beta = 0.0;
  double sup_term = 0.0;
  double quotient_term = 0.0;
  double total = 0.0;
};

/// Sup norm plus the beta-Holder quotient over all pairs of a uniform grid.
HolderNormResult holder_norm(const std::vector<double>& values, double spacing, double beta);

enum class DensityMethod { ibp, kernel, both };

struct DensityStudyConfig {
  std::vector<int> levels;  // level index n; the scheme runs 4^n steps
  int reference_level = 0;
  std::size_t num_paths = 0;
  std::vector<double> betas{0.0};
  int query_count = 41;
  double query_span_std = 4.0;
  DensityMethod method = DensityMethod::both;
  int second_variation_cap = 64;
  std::optional<double> bandwidth;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct DensityRateResult {
  std::vector<double> query;
  std::vector<int> levels;                  // sorted ascending
  std::vector<long> steps;                  // per level
  std::vector<DensityEstimate> ibp_levels;  // aligned with levels when computed
  std::vector<DensityEstimate> kernel_levels;
  DensityEstimate ibp_reference, kernel_reference;
  // One table per (method, beta); the fit abscissa is the level index, so
  // minus the slope estimates the dyadic rate exponent.
  std::vector<std::pair<double, RateTable>> ibp_tables, kernel_tables;
  std::size_t degenerate_samples = 0;
  double kernel_bandwidth = 0.0;
  // Cross-validation of the two estimators on their common smoothed target:
  // E[K_h(y - F)] equals E[Phi((F - y)/h) H] identically on this space, so
  // the per-sample difference has mean zero and the worst z-score over all
  // levels and query points is pure Monte Carlo noise. Negative when only
  // one method ran.
  double agreement_z = -1.0;
};

/// Density convergence ladder under common random numbers: every level and
/// the reference are driven by coarsenings of the same increments, and the
/// Holder error of each level is measured on the per-sample difference
/// estimator so that shared Monte Carlo noise cancels.
DensityRateResult density_rate_study(const CoefficientModel& model,
                                     const std::vector<double>& x0, double horizon,
                                     const DensityStudyConfig& cfg);

/// One paired trajectory for the localized comparison: terminal values of
/// the two functionals and the localization weight attached to the pair.
struct PairedSample {
  double f1 = 0.0;
  double f2 = 0.0;
  double weight = 1.0;
};

struct LocalizedDiffRow {
  double strong_distance = 0.0;   // L2 distance between the terminal values
  double cbeta_weighted = 0.0;    // Holder norm of the weighted density gap
  double cbeta_unweighted = 0.0;  // same with weight identically 1
  double ratio = 0.0;             // cbeta_weighted / strong_distance
  double frac_active = 0.0;       // fraction of samples with weight < 1
  double frac_active_stderr = 0.0;
  double cbeta_stderr = 0.0;
};

/// Compare the weighted laws of two functionals driven by the same noise.
/// Density gaps are estimated with a kernel shared between the pair so the
/// bandwidth bias cancels in the difference.
LocalizedDiffRow localized_density_difference(const std::vector<PairedSample>& samples,
                                              double beta, const std::vector<double>& query);

struct LocalizedLadderConfig {
  int fine_steps = 0;
  std::vector<int> coarse_steps;
  std::size_t num_paths = 0;
  double beta = 0.0;
  int query_count = 41;
  double query_span_std = 4.0;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct LocalizedLadderResult {
  std::vector<int> steps;
  std::vector<LocalizedDiffRow> rows;
};

/// Euler ladder F1 = fine scheme, F2 = coarse scheme, localized through
/// psi of the R statistic; rows report density gaps, strong distances and
/// how often the localization bites.
LocalizedLadderResult localized_ladder_study(const CoefficientModel& model,
                                             const std::vector<double>& x0, double horizon,
                                             const LocalizedLadderConfig& cfg);

}  // namespace pdm
