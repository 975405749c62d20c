#include "pdm/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdm/errors.hpp"
#include "pdm/euler.hpp"
#include "pdm/mc.hpp"
#include "pdm/weights.hpp"

namespace pdm {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gauss_kernel(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

MeanVar sample_moments(const std::vector<double>& xs) {
  return mean_var(xs.begin(), xs.end(), [](double v) { return v; });
}

}  // namespace

DensityEstimate ibp_density(const std::vector<std::pair<double, double>>& samples,
                            const std::vector<double>& query) {
  if (samples.empty()) throw std::invalid_argument("ibp_density: no samples");
  DensityEstimate est;
  est.method = "ibp";
  est.query = query;
  est.value.resize(query.size());
  est.stderr_.resize(query.size());
  const double n = static_cast<double>(samples.size());
  for (std::size_t q = 0; q < query.size(); ++q) {
    const double y = query[q];
    MeanVar mv = mean_var(samples.begin(), samples.end(), [y](const std::pair<double, double>& s) {
      return s.first > y ? s.second : 0.0;
    });
    est.value[q] = mv.mean;
    est.stderr_[q] = mv.stderr_of_mean();
    (void)n;
  }
  return est;
}

DensityEstimate kernel_density(const std::vector<double>& samples,
                               const std::vector<double>& query,
                               std::optional<double> bandwidth) {
  if (samples.size() < 100) throw std::invalid_argument("kernel_density: need at least 100 samples");
  const MeanVar mv = sample_moments(samples);
  const double sd = std::sqrt(mv.variance);
  if (!(sd > 0.0)) throw std::invalid_argument("kernel_density: degenerate (zero variance) sample");
  const double h = bandwidth.value_or(1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2));
  if (!(h > 0.0)) throw std::invalid_argument("kernel_density: bandwidth must be positive");

  DensityEstimate est;
  est.method = "kernel";
  est.query = query;
  est.value.resize(query.size());
  est.stderr_.resize(query.size());
  for (std::size_t q = 0; q < query.size(); ++q) {
    const double y = query[q];
    MeanVar pt = mean_var(samples.begin(), samples.end(),
                          [y, h](double x) { return gauss_kernel((y - x) / h) / h; });
    est.value[q] = pt.mean;
    est.stderr_[q] = pt.stderr_of_mean();
  }
  return est;
}

HolderNormResult holder_norm(const std::vector<double>& values, double spacing, double beta) {
  if (!(beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument("holder_norm: beta must lie in [0, 1)");
  if (values.size() < 2) throw std::invalid_argument("holder_norm: need at least 2 grid points");
  if (!(spacing > 0.0)) throw std::invalid_argument("holder_norm: spacing must be positive");
  HolderNormResult r;
  r.beta = beta;
  for (double v : values) r.sup_term = std::max(r.sup_term, std::abs(v));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      const double dist = static_cast<double>(j - i) * spacing;
      const double quot = std::abs(values[i] - values[j]) / std::pow(dist, beta);
      r.quotient_term = std::max(r.quotient_term, quot);
    }
  r.total = r.sup_term + r.quotient_term;
  return r;
}

namespace {

// Holder norm of a difference field given pointwise standard errors;
// returns the norm and a standard error read off at the extremal points.
std::pair<HolderNormResult, double> holder_norm_with_se(const std::vector<double>& values,
                                                        const std::vector<double>& se,
                                                        double spacing, double beta) {
  HolderNormResult r;
  r.beta = beta;
  std::size_t arg_sup = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (std::abs(values[i]) > r.sup_term) {
      r.sup_term = std::abs(values[i]);
      arg_sup = i;
    }
  std::size_t qa = 0, qb = 1;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      const double dist = static_cast<double>(j - i) * spacing;
      const double quot = std::abs(values[i] - values[j]) / std::pow(dist, beta);
      if (quot > r.quotient_term) {
        r.quotient_term = quot;
        qa = i;
        qb = j;
      }
    }
  r.total = r.sup_term + r.quotient_term;
  const double quot_dist = std::pow(static_cast<double>(qb - qa) * spacing, beta);
  const double se_total = se[arg_sup] + std::sqrt(se[qa] * se[qa] + se[qb] * se[qb]) / quot_dist;
  return {r, se_total};
}

std::vector<double> make_query_grid(double center, double sd, int count, double span) {
  std::vector<double> q(count);
  if (count == 1) {
    q[0] = center;
    return q;
  }
  const double lo = center - span * sd, hi = center + span * sd;
  for (int i = 0; i < count; ++i) q[i] = lo + (hi - lo) * i / (count - 1);
  return q;
}

}  // namespace

DensityRateResult density_rate_study(const CoefficientModel& model,
                                     const std::vector<double>& x0, double horizon,
                                     const DensityStudyConfig& study_cfg) {
  DensityStudyConfig cfg = study_cfg;
  if (model.d() != 1 || model.m() != 1)
    throw std::invalid_argument("density_rate_study: scalar models only");
  if (cfg.levels.empty()) throw std::invalid_argument("density_rate_study: no levels");
  std::sort(cfg.levels.begin(), cfg.levels.end());
  int max_level = 0;
  for (int lv : cfg.levels) {
    if (lv < 0) throw std::invalid_argument("density_rate_study: negative level");
    max_level = std::max(max_level, lv);
  }
  if (cfg.reference_level < max_level + 1)
    throw std::invalid_argument("density_rate_study: reference level must exceed every ladder level");
  const long ref_steps = 1L << (2 * cfg.reference_level);
  const bool want_ibp = cfg.method != DensityMethod::kernel;
  const bool want_kernel = cfg.method != DensityMethod::ibp;
  if (want_ibp && ref_steps > cfg.second_variation_cap)
    throw InfeasibleError("density_rate_study: reference resolution " + std::to_string(ref_steps) +
                          " exceeds the second-variation cap of " +
                          std::to_string(cfg.second_variation_cap) +
                          "; raise the cap or use the kernel method");

  const std::size_t nlev = cfg.levels.size();
  std::vector<TimeGrid> grids;
  std::vector<long> steps;
  for (int lv : cfg.levels) {
    steps.push_back(1L << (2 * lv));
    grids.push_back(make_grid(horizon, static_cast<int>(steps.back())));
  }
  const TimeGrid ref_grid = make_grid(horizon, static_cast<int>(ref_steps));

  // Per path: (F, H) per level plus the reference pair. H slots stay zero
  // for kernel-only runs.
  const std::size_t rec_len = 2 * (nlev + 1) + 1;  // + degenerate flag
  auto per_path = [&](std::size_t idx) -> std::vector<double> {
    std::vector<double> rec(rec_len, 0.0);
    const IncrementMatrix zf = sample_increments(cfg.seed, idx, ref_grid, 1);
    for (std::size_t lev = 0; lev <= nlev; ++lev) {
      const TimeGrid& g = lev < nlev ? grids[lev] : ref_grid;
      const IncrementMatrix z =
          lev < nlev ? coarsen(zf, static_cast<int>(ref_steps / steps[lev])) : zf;
      if (want_ibp) {
        const IbpContractions c = ibp_contractions(model, g, z, x0);
        rec[2 * lev] = c.value;
        if (c.covariance > 0.0) {
          rec[2 * lev + 1] = ibp_weight_from_contractions(c, z, g);
        } else {
          rec[2 * lev + 1] = 0.0;  // dropped, logged through the flag below
          rec[rec_len - 1] = 1.0;
        }
      } else {
        rec[2 * lev] = solve(model, g, z, x0).at(g.steps);
      }
    }
    return rec;
  };

  const auto results = mc_map<std::vector<double>>(cfg.num_paths, cfg.workers, per_path);

  DensityRateResult out;
  out.levels = cfg.levels;
  out.steps = steps;
  for (const auto& r : results)
    if (r[rec_len - 1] != 0.0) ++out.degenerate_samples;

  // Query grid from the reference sample cloud.
  std::vector<double> ref_values(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) ref_values[i] = results[i][2 * nlev];
  const MeanVar ref_mv = sample_moments(ref_values);
  out.query = make_query_grid(ref_mv.mean, std::sqrt(ref_mv.variance), cfg.query_count,
                              cfg.query_span_std);
  const double spacing =
      out.query.size() > 1 ? out.query[1] - out.query[0] : 1.0;

  auto level_estimates = [&](bool ibp) {
    std::vector<DensityEstimate> ests;
    for (std::size_t lev = 0; lev <= nlev; ++lev) {
      if (ibp) {
        std::vector<std::pair<double, double>> s(results.size());
        for (std::size_t i = 0; i < results.size(); ++i)
          s[i] = {results[i][2 * lev], results[i][2 * lev + 1]};
        ests.push_back(ibp_density(s, out.query));
      } else {
        std::vector<double> s(results.size());
        for (std::size_t i = 0; i < results.size(); ++i) s[i] = results[i][2 * lev];
        ests.push_back(kernel_density(s, out.query, cfg.bandwidth));
      }
    }
    return ests;
  };

  // Error ladder on the per-sample difference against the reference.
  auto build_tables = [&](bool ibp) {
    std::vector<std::pair<double, RateTable>> tables;
    // Common bandwidth so kernel bias cancels in the difference.
    const double h = cfg.bandwidth.value_or(
        1.06 * std::sqrt(ref_mv.variance) * std::pow(static_cast<double>(results.size()), -0.2));
    for (double beta : cfg.betas) {
      RateTable table;
      table.seed = cfg.seed;
      double max_err = 0.0;
      for (std::size_t lev = 0; lev < nlev; ++lev) {
        std::vector<double> diff(out.query.size()), dse(out.query.size());
        for (std::size_t q = 0; q < out.query.size(); ++q) {
          const double y = out.query[q];
          MeanVar mv = mean_var(results.begin(), results.end(), [&](const std::vector<double>& r) {
            if (ibp) {
              const double a = r[2 * lev] > y ? r[2 * lev + 1] : 0.0;
              const double b = r[2 * nlev] > y ? r[2 * nlev + 1] : 0.0;
              return a - b;
            }
            return (gauss_kernel((y - r[2 * lev]) / h) - gauss_kernel((y - r[2 * nlev]) / h)) / h;
          });
          diff[q] = mv.mean;
          dse[q] = mv.stderr_of_mean();
        }
        const auto [norm, se] = holder_norm_with_se(diff, dse, spacing, beta);
        RatePoint pt;
        pt.level = cfg.levels[lev];
        pt.resolution = static_cast<double>(steps[lev]);
        pt.error = norm.total;
        pt.stderr_ = se;
        max_err = std::max(max_err, pt.error);
        table.rows.push_back(pt);
      }
      table.exact = max_err <= 1e-10;
      if (!table.exact && table.rows.size() >= 3) {
        std::vector<std::pair<double, double>> pts;
        bool ok = true;
        for (const RatePoint& r : table.rows) {
          if (!(r.error > 0.0)) ok = false;
          else pts.push_back({r.level, std::log2(r.error)});
        }
        if (ok) table.fit = fit_rate(pts);
      }
      tables.push_back({beta, std::move(table)});
    }
    return tables;
  };

  out.kernel_bandwidth = cfg.bandwidth.value_or(
      1.06 * std::sqrt(ref_mv.variance) * std::pow(static_cast<double>(results.size()), -0.2));
  if (want_ibp) {
    auto ests = level_estimates(true);
    out.ibp_reference = std::move(ests.back());
    ests.pop_back();
    out.ibp_levels = std::move(ests);
    out.ibp_tables = build_tables(true);
  }
  if (want_kernel) {
    auto ests = level_estimates(false);
    out.kernel_reference = std::move(ests.back());
    ests.pop_back();
    out.kernel_levels = std::move(ests);
    out.kernel_tables = build_tables(false);
  }

  if (want_ibp && want_kernel) {
    // Exact-identity cross-check of the two estimators: smoothing the
    // tail-weight form with Phi((F - y)/h) targets the same convolved
    // density as the kernel mean, so the per-sample gap is centred.
    const double h = out.kernel_bandwidth;
    const double inv_sqrt2 = 0.7071067811865476;
    double worst = 0.0;
    for (std::size_t lev = 0; lev <= nlev; ++lev) {
      for (double y : out.query) {
        MeanVar mv = mean_var(results.begin(), results.end(), [&](const std::vector<double>& r) {
          const double f = r[2 * lev], w = r[2 * lev + 1];
          const double smoothed_ibp = 0.5 * std::erfc(-(f - y) / h * inv_sqrt2) * w;
          return smoothed_ibp - gauss_kernel((y - f) / h) / h;
        });
        const double se = mv.stderr_of_mean();
        if (se > 0.0) worst = std::max(worst, std::abs(mv.mean) / se);
      }
    }
    out.agreement_z = worst;
  }
  return out;
}

LocalizedDiffRow localized_density_difference(const std::vector<PairedSample>& samples,
                                              double beta, const std::vector<double>& query) {
  if (samples.size() < 100)
    throw std::invalid_argument("localized_density_difference: need at least 100 samples");
  if (query.size() < 2)
    throw std::invalid_argument("localized_density_difference: need a query grid");
  const double spacing = query[1] - query[0];

  MeanVar f1_mv = mean_var(samples.begin(), samples.end(),
                           [](const PairedSample& s) { return s.f1; });
  const double sd = std::sqrt(f1_mv.variance);
  if (!(sd > 0.0))
    throw std::invalid_argument("localized_density_difference: degenerate sample");
  const double h = 1.06 * sd * std::pow(static_cast<double>(samples.size()), -0.2);

  LocalizedDiffRow row;
  MeanVar dist_mv = mean_var(samples.begin(), samples.end(), [](const PairedSample& s) {
    return (s.f1 - s.f2) * (s.f1 - s.f2);
  });
  row.strong_distance = std::sqrt(dist_mv.mean);

  MeanVar act_mv = mean_var(samples.begin(), samples.end(),
                            [](const PairedSample& s) { return s.weight < 1.0 ? 1.0 : 0.0; });
  row.frac_active = act_mv.mean;
  row.frac_active_stderr = act_mv.stderr_of_mean();

  auto gap_norm = [&](bool weighted) {
    std::vector<double> diff(query.size()), dse(query.size());
    for (std::size_t q = 0; q < query.size(); ++q) {
      const double y = query[q];
      MeanVar mv = mean_var(samples.begin(), samples.end(), [&](const PairedSample& s) {
        const double w = weighted ? s.weight : 1.0;
        return w * (gauss_kernel((y - s.f1) / h) - gauss_kernel((y - s.f2) / h)) / h;
      });
      diff[q] = mv.mean;
      dse[q] = mv.stderr_of_mean();
    }
    return holder_norm_with_se(diff, dse, spacing, beta);
  };
  const auto [wnorm, wse] = gap_norm(true);
  const auto [unorm, use_] = gap_norm(false);
  (void)use_;
  row.cbeta_weighted = wnorm.total;
  row.cbeta_unweighted = unorm.total;
  row.cbeta_stderr = wse;
  row.ratio = row.strong_distance > 0.0 ? row.cbeta_weighted / row.strong_distance : 0.0;
  return row;
}

LocalizedLadderResult localized_ladder_study(const CoefficientModel& model,
                                             const std::vector<double>& x0, double horizon,
                                             const LocalizedLadderConfig& cfg) {
  if (model.d() != 1 || model.m() != 1)
    throw std::invalid_argument("localized_ladder_study: scalar models only");
  for (int nc : cfg.coarse_steps)
    if (nc < 1 || cfg.fine_steps % nc != 0)
      throw std::invalid_argument("localized_ladder_study: ladder must divide the fine resolution");

  const TimeGrid fine = make_grid(horizon, cfg.fine_steps);
  std::vector<TimeGrid> grids;
  for (int nc : cfg.coarse_steps) grids.push_back(make_grid(horizon, nc));
  const std::size_t nlev = cfg.coarse_steps.size();

  // Per path: F1, then per level (F2, R).
  auto per_path = [&](std::size_t idx) -> std::vector<double> {
    std::vector<double> rec(1 + 2 * nlev, 0.0);
    const IncrementMatrix zf = sample_increments(cfg.seed, idx, fine, 1);
    const DiscretePath xf = solve(model, fine, zf, x0);
    const VariationTensor vf = first_variation(model, fine, zf, x0);
    rec[0] = xf.at(fine.steps);

    double cov_fine = 0.0;
    for (int k = 0; k < fine.steps; ++k) {
      const double g = vf.at(k, fine.steps);
      cov_fine += g * g * fine.dt;
    }

    for (std::size_t lev = 0; lev < nlev; ++lev) {
      const TimeGrid& cg = grids[lev];
      const int factor = cfg.fine_steps / cg.steps;
      const IncrementMatrix zc = coarsen(zf, factor);
      const DiscretePath xc = solve(model, cg, zc, x0);
      const VariationTensor vc = first_variation(model, cg, zc, x0);
      // Coarse gradient expanded onto fine cells (the coarse increment is a
      // sum of fine ones, so the chain rule replicates the entry).
      double num = 0.0;
      for (int k = 0; k < fine.steps; ++k) {
        const double diff = vf.at(k, fine.steps) - vc.at(k / factor, cg.steps);
        num += diff * diff * fine.dt;
      }
      rec[1 + 2 * lev] = xc.at(cg.steps);
      rec[2 + 2 * lev] = cov_fine > 0.0 ? num / cov_fine
                                        : std::numeric_limits<double>::infinity();
    }
    return rec;
  };

  const auto results = mc_map<std::vector<double>>(cfg.num_paths, cfg.workers, per_path);

  // Shared query grid from the fine terminal cloud.
  std::vector<double> f1(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) f1[i] = results[i][0];
  const MeanVar mv = mean_var(f1.begin(), f1.end(), [](double v) { return v; });
  const std::vector<double> query = make_query_grid(mv.mean, std::sqrt(mv.variance),
                                                    cfg.query_count, cfg.query_span_std);

  LocalizedLadderResult out;
  out.steps = cfg.coarse_steps;
  for (std::size_t lev = 0; lev < nlev; ++lev) {
    std::vector<PairedSample> samples(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
      samples[i].f1 = results[i][0];
      samples[i].f2 = results[i][1 + 2 * lev];
      samples[i].weight = cutoff_psi(results[i][2 + 2 * lev]);
    }
    out.rows.push_back(localized_density_difference(samples, cfg.beta, query));
  }
  return out;
}

}  // namespace pdm
