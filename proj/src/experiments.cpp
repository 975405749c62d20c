#include "pdm/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "pdm/csv.hpp"
#include "pdm/mc.hpp"
#include "pdm/density.hpp"
#include "pdm/errors.hpp"
#include "pdm/euler.hpp"
#include "pdm/jet.hpp"
#include "pdm/quadrature.hpp"
#include "pdm/version.hpp"
#include "pdm/weights.hpp"

namespace pdm {

namespace {

using nlohmann::json;

std::string emit_csv(const CsvWriter& csv, const ExperimentConfig& cfg, const std::string& name,
                     ReportBundle& bundle) {
  std::filesystem::create_directories(cfg.output_dir);
  const std::string path = (std::filesystem::path(cfg.output_dir) / name).string();
  csv.write(path);
  bundle.csv_paths.push_back(path);
  return path;
}

json table_to_json(const RateTable& t) {
  json j;
  j["exact"] = t.exact;
  if (t.fit) {
    j["slope"] = t.fit->slope;
    j["slope_stderr"] = t.fit->slope_stderr;
    j["r2"] = t.fit->r2;
  }
  json rows = json::array();
  for (const RatePoint& r : t.rows)
    rows.push_back({{"level", r.level},
                    {"resolution", r.resolution},
                    {"error", r.error},
                    {"stderr", r.stderr_}});
  j["rows"] = rows;
  return j;
}

CsvWriter table_to_csv(const RateTable& t) {
  CsvWriter csv({"level", "resolution", "error", "stderr"});
  for (const RatePoint& r : t.rows)
    csv.row({format_double(r.level), format_double(r.resolution), format_double(r.error),
             format_double(r.stderr_)});
  return csv;
}

bool slope_in_band(const RateTable& t, double lo, double hi, double r2_min) {
  if (!t.fit) return false;
  return t.fit->slope >= lo && t.fit->slope <= hi && t.fit->r2 >= r2_min;
}

// ---------------------------------------------------------------- strong rate

void run_strong_rate(const ExperimentConfig& cfg, ReportBundle& bundle, json& detail) {
  StudyConfig sc;
  sc.coarse_steps = cfg.coarse_steps;
  sc.fine_steps = cfg.fine_steps;
  sc.num_paths = cfg.num_paths;
  sc.p = cfg.p;
  sc.seed = cfg.seed;
  sc.workers = cfg.workers;
  const StrongStudyResult res = strong_error_study(*cfg.model, {cfg.x0}, cfg.horizon, sc);

  emit_csv(table_to_csv(res.errors), cfg, "strong_rate.csv", bundle);
  emit_csv(table_to_csv(res.increments), cfg, "increment_bound.csv", bundle);
  detail["strong"] = table_to_json(res.errors);
  detail["increments"] = table_to_json(res.increments);

  if (cfg.check_mode) {
    bool pass = false;
    if (res.errors.exact) {
      pass = true;
    } else {
      pass = slope_in_band(res.errors, cfg.check.slope_min, cfg.check.slope_max, cfg.check.r2_min) &&
             slope_in_band(res.increments, cfg.check.increment_slope_min,
                           cfg.check.increment_slope_max, 0.0);
    }
    bundle.check_passed = pass;
  }
}

// ------------------------------------------------------------ derivative rate

void run_derivative_rate(const ExperimentConfig& cfg, ReportBundle& bundle, json& detail) {
  StudyConfig sc;
  sc.coarse_steps = cfg.coarse_steps;
  sc.fine_steps = cfg.fine_steps;
  sc.num_paths = cfg.num_paths;
  sc.p = cfg.p;
  sc.seed = cfg.seed;
  sc.workers = cfg.workers;
  const RateTable res = derivative_error_study(*cfg.model, {cfg.x0}, cfg.horizon, sc);

  emit_csv(table_to_csv(res), cfg, "derivative_rate.csv", bundle);
  detail["derivative"] = table_to_json(res);
  if (cfg.check_mode)
    bundle.check_passed =
        res.exact || slope_in_band(res, cfg.check.slope_min, cfg.check.slope_max, cfg.check.r2_min);
}

// -------------------------------------------------------------- density rate

bool strictly_decreasing(const RateTable& t, double sigmas) {
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    const double gap = t.rows[i].error - t.rows[i + 1].error;
    const double se = std::sqrt(t.rows[i].stderr_ * t.rows[i].stderr_ +
                                t.rows[i + 1].stderr_ * t.rows[i + 1].stderr_);
    if (!(gap > sigmas * se)) return false;
  }
  return true;
}

void run_density_rate(const ExperimentConfig& cfg, ReportBundle& bundle, json& detail) {
  DensityStudyConfig dc;
  dc.levels = cfg.levels;
  dc.reference_level = cfg.reference_level;
  dc.num_paths = cfg.num_paths;
  dc.betas = cfg.betas;
  dc.query_count = cfg.query_points;
  dc.query_span_std = cfg.query_span_std;
  dc.method = cfg.method;
  dc.second_variation_cap = cfg.second_variation_cap;
  dc.bandwidth = cfg.bandwidth;
  dc.seed = cfg.seed;
  dc.workers = cfg.workers;
  const DensityRateResult res = density_rate_study(*cfg.model, {cfg.x0}, cfg.horizon, dc);

  CsvWriter ladder({"method", "beta", "level", "steps", "error", "stderr"});
  auto ladder_rows = [&ladder](const char* method,
                               const std::vector<std::pair<double, RateTable>>& tables) {
    for (const auto& [beta, table] : tables)
      for (const RatePoint& r : table.rows)
        ladder.row({method, format_double(beta), format_double(r.level),
                    format_double(r.resolution), format_double(r.error),
                    format_double(r.stderr_)});
  };
  ladder_rows("ibp", res.ibp_tables);
  ladder_rows("kernel", res.kernel_tables);
  emit_csv(ladder, cfg, "density_rate.csv", bundle);

  CsvWriter dens({"level", "steps", "method", "y", "p_hat", "stderr"});
  auto dens_rows = [&dens, &res](int level, long steps, const DensityEstimate& est) {
    for (std::size_t q = 0; q < res.query.size(); ++q)
      dens.row({std::to_string(level), std::to_string(steps), est.method,
                format_double(est.query[q]), format_double(est.value[q]),
                format_double(est.stderr_[q])});
  };
  for (std::size_t lev = 0; lev < res.ibp_levels.size(); ++lev)
    dens_rows(res.levels[lev], res.steps[lev], res.ibp_levels[lev]);
  if (!res.ibp_reference.query.empty())
    dens_rows(cfg.reference_level, 1L << (2 * cfg.reference_level), res.ibp_reference);
  for (std::size_t lev = 0; lev < res.kernel_levels.size(); ++lev)
    dens_rows(res.levels[lev], res.steps[lev], res.kernel_levels[lev]);
  if (!res.kernel_reference.query.empty())
    dens_rows(cfg.reference_level, 1L << (2 * cfg.reference_level), res.kernel_reference);
  emit_csv(dens, cfg, "densities.csv", bundle);

  json tables = json::array();
  auto summarize = [&tables, &cfg](const char* method,
                                   const std::vector<std::pair<double, RateTable>>& tabs) {
    for (const auto& [beta, table] : tabs) {
      json t = table_to_json(table);
      t["method"] = method;
      t["beta"] = beta;
      if (table.fit) t["theta_hat"] = -table.fit->slope;
      t["strictly_decreasing"] = strictly_decreasing(table, cfg.check.decrease_sigmas);
      tables.push_back(t);
    }
  };
  summarize("ibp", res.ibp_tables);
  summarize("kernel", res.kernel_tables);
  detail["tables"] = tables;
  detail["degenerate_samples"] = res.degenerate_samples;
  // Degenerate samples enter the estimator with weight zero, i.e. they are
  // exactly the samples on which the localization acted.
  detail["localization_activations"] = res.degenerate_samples;
  if (res.agreement_z >= 0.0) detail["estimator_agreement_z"] = res.agreement_z;

  if (cfg.check_mode) {
    const auto& primary = !res.ibp_tables.empty() ? res.ibp_tables : res.kernel_tables;
    bool pass = !primary.empty();
    for (const auto& [beta, table] : primary) {
      if (table.exact) continue;  // exact scheme: noise floor, nothing to decay
      const bool theta_ok = table.fit && -table.fit->slope > cfg.check.theta_min;
      pass = pass && theta_ok && strictly_decreasing(table, cfg.check.decrease_sigmas);
    }
    bundle.check_passed = pass;
  }
}

// ------------------------------------------------------------------ ibp check

// Case matrix for the duality check: polynomial functionals with uniformly
// nondegenerate gradients, polynomial test functions and weights.
struct DualityCase {
  int id;
  int steps;
  int f_id;  // 0: W(T); 1: W(T) + 0.3 xi_0^3; 2: W(T) + 0.2 sum xi_k^3
  int g_id;  // 1, 2, 3: g(x) = x^g_id
  int w_id;  // 0: G = 1; 1: G = 1 + 0.5 xi_0^2; 2: G = xi_0
};

Jet case_functional(int f_id, int nm, int order, const IncrementMatrix& dw) {
  Jet f = Jet::constant(nm, order, 0.0);
  for (int c = 0; c < nm; ++c) {
    const Jet xi = Jet::variable(nm, order, c, dw.data[c]);
    f += xi;
    if (f_id == 1 && c == 0) f += (xi * xi * xi) * 0.3;
    if (f_id == 2) f += (xi * xi * xi) * 0.2;
  }
  return f;
}

Jet case_weight(int w_id, int nm, int order, const IncrementMatrix& dw) {
  const Jet xi0 = Jet::variable(nm, order, 0, dw.data[0]);
  if (w_id == 1) return Jet::constant(nm, order, 1.0) + (xi0 * xi0) * 0.5;
  if (w_id == 2) return xi0;
  return Jet::constant(nm, order, 1.0);
}

double g_value(int g_id, double x) {
  if (g_id == 1) return x;
  if (g_id == 2) return x * x;
  return x * x * x;
}

double g_prime(int g_id, double x) {
  if (g_id == 1) return 1.0;
  if (g_id == 2) return 2.0 * x;
  return 3.0 * x * x;
}

void run_ibp_check(const ExperimentConfig& cfg, ReportBundle& bundle, json& detail) {
  static const std::vector<DualityCase> cases = {
      {1, 1, 0, 1, 0},  {2, 1, 0, 2, 0},  {3, 1, 0, 3, 0},  {4, 1, 1, 1, 0},
      {5, 1, 1, 2, 0},  {6, 1, 1, 3, 0},  {7, 1, 0, 1, 1},  {8, 1, 0, 2, 1},
      {9, 1, 1, 2, 1},  {10, 1, 1, 3, 1}, {11, 1, 0, 2, 2}, {12, 1, 1, 2, 2},
      {13, 2, 0, 2, 0}, {14, 2, 2, 2, 0}, {15, 2, 2, 3, 0}, {16, 2, 0, 2, 2},
      {17, 2, 2, 2, 2}, {18, 2, 0, 1, 1}, {19, 3, 0, 2, 0}, {20, 3, 2, 2, 0},
  };

  CsvWriter csv({"case", "steps", "functional", "test_fn", "weight", "lhs", "rhs", "abs_err"});
  double max_err = 0.0;
  for (const DualityCase& c : cases) {
    const TimeGrid grid = make_grid(cfg.horizon > 0 ? cfg.horizon : 1.0, c.steps);
    const int nm = c.steps;

    auto lhs_fn = [&](const IncrementMatrix& dw) {
      const Jet f = case_functional(c.f_id, nm, 0, dw);
      const Jet g = case_weight(c.w_id, nm, 0, dw);
      return g_prime(c.g_id, f.value()) * g.value();
    };
    auto rhs_fn = [&](const IncrementMatrix& dw) {
      JetFunctional F;
      F.n = c.steps;
      F.m = 1;
      F.component = {case_functional(c.f_id, nm, 2, dw)};
      const FunctionalState fs = functional_from_jets(F);
      JetFunctional G;
      G.n = c.steps;
      G.m = 1;
      G.component = {case_weight(c.w_id, nm, 2, dw)};
      const FunctionalState gs = functional_from_jets(G);
      const WeightSample w = ibp_weight_first(fs, gs, 0, dw, grid);
      return g_value(c.g_id, fs.value[0]) * w.h;
    };
    const double lhs = gh_expectation(lhs_fn, grid, 1, cfg.quadrature_nodes);
    const double rhs = gh_expectation(rhs_fn, grid, 1, cfg.quadrature_nodes);
    const double err = std::abs(lhs - rhs);
    max_err = std::max(max_err, err);
    static const char* f_names[] = {"W(T)", "W(T)+0.3*xi0^3", "W(T)+0.2*sum(xi^3)"};
    static const char* g_names[] = {"", "x", "x^2", "x^3"};
    static const char* w_names[] = {"1", "1+0.5*xi0^2", "xi0"};
    csv.row({std::to_string(c.id), std::to_string(c.steps), f_names[c.f_id], g_names[c.g_id],
             w_names[c.w_id], format_double(lhs), format_double(rhs), format_double(err)});
  }
  emit_csv(csv, cfg, "ibp_check.csv", bundle);
  detail["cases"] = cases.size();
  detail["max_abs_err"] = max_err;
  detail["tolerance"] = cfg.check.tolerance;
  if (cfg.check_mode) bundle.check_passed = max_err < cfg.check.tolerance;
}

// ---------------------------------------------------------------- holder norm

void run_holder_norm(const ExperimentConfig& cfg, ReportBundle& bundle, json& detail) {
  const HolderNormResult res = holder_norm(cfg.values, cfg.spacing, cfg.beta);
  CsvWriter csv({"index", "x", "value"});
  for (std::size_t i = 0; i < cfg.values.size(); ++i)
    csv.row({std::to_string(i), format_double(i * cfg.spacing), format_double(cfg.values[i])});
  emit_csv(csv, cfg, "holder_norm.csv", bundle);
  detail["beta"] = res.beta;
  detail["sup_term"] = res.sup_term;
  detail["quotient_term"] = res.quotient_term;
  detail["total"] = res.total;
}

// ----------------------------------------------------------- ellipticity check

void run_ellipticity(const ExperimentConfig& cfg, ReportBundle& bundle, json& detail) {
  const TimeGrid grid = make_grid(cfg.horizon, cfg.steps);
  const CoefficientModel& model = *cfg.model;

  CsvWriter csv({"path", "min_eigenvalue"});
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.num_paths; ++i) {
    const IncrementMatrix dw = sample_increments(cfg.seed, i, grid, model.m());
    const DiscretePath path = solve(model, grid, dw, {cfg.x0});
    const double eig = check_ellipticity(model, {path});
    min_eig = std::min(min_eig, eig);
    csv.row({std::to_string(i), format_double(eig)});
  }
  emit_csv(csv, cfg, "ellipticity.csv", bundle);

  const double floor = cfg.check.min_eigenvalue.value_or(model.ellipticity_floor());
  detail["min_eigenvalue"] = min_eig;
  detail["floor"] = floor;
  detail["lipschitz_constant"] = model.lipschitz_constant(cfg.horizon);
  detail["growth_constant"] = model.growth_constant(cfg.horizon);
  if (cfg.check_mode) bundle.check_passed = min_eig >= floor;
}

}  // namespace

ReportBundle run_experiment(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  ReportBundle bundle;
  json detail;

  switch (cfg.kind) {
    case ExperimentKind::strong_rate: run_strong_rate(cfg, bundle, detail); break;
    case ExperimentKind::derivative_rate: run_derivative_rate(cfg, bundle, detail); break;
    case ExperimentKind::density_rate: run_density_rate(cfg, bundle, detail); break;
    case ExperimentKind::ibp_check: run_ibp_check(cfg, bundle, detail); break;
    case ExperimentKind::holder_norm: run_holder_norm(cfg, bundle, detail); break;
    case ExperimentKind::ellipticity_check: run_ellipticity(cfg, bundle, detail); break;
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  json summary;
  summary["experiment"] = to_string(cfg.kind);
  summary["version"] = kVersion;
  summary["seed"] = cfg.seed;
  summary["config_hash"] = cfg.config_hash;
  summary["workers"] = resolve_workers(cfg.workers);
  if (cfg.num_paths > 0) summary["num_paths"] = cfg.num_paths;
  summary["wall_clock_seconds"] = seconds;
  summary["outputs"] = bundle.csv_paths;
  summary["detail"] = detail;
  if (cfg.check_mode) summary["check_passed"] = bundle.check_passed;

  std::filesystem::create_directories(cfg.output_dir);
  bundle.summary_path = (std::filesystem::path(cfg.output_dir) / "summary.json").string();
  std::ofstream out(bundle.summary_path, std::ios::binary);
  out << summary.dump(2) << '\n';
  bundle.summary = std::move(summary);
  return bundle;
}

}  // namespace pdm
