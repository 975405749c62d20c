#include "pdm/euler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pdm/errors.hpp"
#include "pdm/mc.hpp"

namespace pdm {

namespace {

bool finite_all(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// One forward sweep of the scheme, retaining the per-step frozen
// coefficients. All featured models are scalar; the constant model may be
// matrix valued. Feature bookkeeping is incremental and reproduces
// CoefficientModel::features bit for bit.
struct SchemeSweep {
  DiscretePath path;
  std::vector<double> sigma;  // n * d * m
  std::vector<double> drift;  // n * d
  // Per-step family derivatives for scalar featured models.
  std::vector<CoeffFamily::Derivs> ds, db;
};

SchemeSweep sweep(const CoefficientModel& model, const TimeGrid& grid,
                  const IncrementMatrix& dW, const std::vector<double>& x0) {
  const int n = grid.steps, d = model.d(), m = model.m();
  if (dW.n != n || dW.m != m) throw std::invalid_argument("solve: increment shape mismatch");
  if (static_cast<int>(x0.size()) != d)
    throw std::invalid_argument("solve: initial value dimension mismatch");

  SchemeSweep out;
  out.path = DiscretePath(grid, d);
  out.sigma.resize(static_cast<std::size_t>(n) * d * m);
  out.drift.resize(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < d; ++i) out.path.at(0, i) = x0[i];

  const bool featured = model.kind() != ModelKind::constant;
  if (featured) {
    out.ds.resize(n);
    out.db.resize(n);
  }
  double integral = 0.0;  // running trapezoid of the scalar path

  for (int l = 0; l < n; ++l) {
    if (featured) {
      double u = 0.0;
      const double v = out.path.at(l);
      switch (model.u_feature()) {
        case UFeature::current: u = v; break;
        case UFeature::lag: u = out.path.eval(grid.nodes[l] - model.lag()); break;
        case UFeature::integral: u = integral; break;
        case UFeature::none: break;
      }
      out.ds[l] = model.sigma_family().eval(u, v);
      out.db[l] = model.drift_family().eval(u, v);
      out.sigma[l] = out.ds[l].f;
      out.drift[l] = out.db[l].f;
      if (!std::isfinite(out.sigma[l]) || !std::isfinite(out.drift[l]))
        throw std::runtime_error("solve: non-finite coefficient at step " + std::to_string(l));
      out.path.at(l + 1) = out.path.at(l) + out.drift[l] * grid.dt + out.sigma[l] * dW.at(l, 0);
      integral += 0.5 * grid.dt * (out.path.at(l) + out.path.at(l + 1));
    } else {
      const CoeffValues cv = model.eval_coeffs(l, out.path);
      if (!finite_all(cv.sigma) || !finite_all(cv.drift))
        throw std::runtime_error("solve: non-finite coefficient at step " + std::to_string(l));
      std::copy(cv.sigma.begin(), cv.sigma.end(),
                out.sigma.begin() + static_cast<std::size_t>(l) * d * m);
      std::copy(cv.drift.begin(), cv.drift.end(),
                out.drift.begin() + static_cast<std::size_t>(l) * d);
      for (int i = 0; i < d; ++i) {
        double x = out.path.at(l, i) + cv.drift[i] * grid.dt;
        for (int j = 0; j < m; ++j) x += cv.sigma[i * m + j] * dW.at(l, j);
        out.path.at(l + 1, i) = x;
      }
    }
    for (int i = 0; i < d; ++i)
      if (!std::isfinite(out.path.at(l + 1, i)))
        throw std::runtime_error("solve: state overflow at step " + std::to_string(l));
  }
  return out;
}

// u-feature weights per step, resolved once per column.
struct LagStencil {
  int idx0 = 0, idx1 = -1;
  double w0 = 0.0, w1 = 0.0;
};

LagStencil lag_stencil(const CoefficientModel& model, const TimeGrid& grid, int l) {
  LagStencil st;
  const FeatureWeights w = model.u_weights(l, grid);
  st.idx0 = w.terms[0].first;
  st.w0 = w.terms[0].second;
  if (w.terms.size() > 1) {
    st.idx1 = w.terms[1].first;
    st.w1 = w.terms[1].second;
  }
  return st;
}

}  // namespace

DiscretePath solve(const CoefficientModel& model, const TimeGrid& grid,
                   const IncrementMatrix& dW, const std::vector<double>& x0) {
  return sweep(model, grid, dW, x0).path;
}

GradientField VariationTensor::terminal_gradient(int i) const {
  GradientField g(n, m);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < m; ++j) g.at(k, j) = at(k, n, j, i);
  return g;
}

VariationTensor first_variation(const CoefficientModel& model, const TimeGrid& grid,
                                const IncrementMatrix& dW, const std::vector<double>& x0) {
  const int n = grid.steps, d = model.d(), m = model.m();
  VariationTensor V(n, m, d);
  if (model.kind() == ModelKind::constant) {
    const CoeffValues cv = model.eval_coeffs(0, DiscretePath(grid, d));
    for (int k = 0; k < n; ++k)
      for (int l = k + 1; l <= n; ++l)
        for (int j = 0; j < m; ++j)
          for (int i = 0; i < d; ++i) V.at(k, l, j, i) = cv.sigma[i * m + j];
    return V;
  }

  const SchemeSweep sw = sweep(model, grid, dW, x0);
  const UFeature uf = model.u_feature();
  std::vector<double> iu(n, 0.0);  // running trapezoid of V[k][.] per k

  for (int l = 0; l < n; ++l) {
    const auto& fs = sw.ds[l];
    const auto& fb = sw.db[l];
    const double dw = dW.at(l, 0);
    LagStencil st;
    if (uf == UFeature::lag) st = lag_stencil(model, grid, l);

    for (int k = 0; k < l; ++k) {
      const double vdot = V.at(k, l);
      double udot = 0.0;
      switch (uf) {
        case UFeature::current: udot = vdot; break;
        case UFeature::lag:
          udot = st.w0 * V.at(k, st.idx0) + (st.idx1 >= 0 ? st.w1 * V.at(k, st.idx1) : 0.0);
          break;
        case UFeature::integral: udot = iu[k]; break;
        case UFeature::none: break;
      }
      V.at(k, l + 1) = vdot + (fb.fu * udot + fb.fv * vdot) * grid.dt +
                       (fs.fu * udot + fs.fv * vdot) * dw;
    }
    V.at(l, l + 1) = fs.f;  // diffusion source on the new cell

    if (uf == UFeature::integral)
      for (int k = 0; k <= l; ++k) iu[k] += 0.5 * grid.dt * (V.at(k, l) + V.at(k, l + 1));
  }
  return V;
}

SecondVariationTensor second_variation(const CoefficientModel& model, const TimeGrid& grid,
                                       const IncrementMatrix& dW, const std::vector<double>& x0,
                                       int step_cap) {
  const int n = grid.steps;
  if (n > step_cap)
    throw InfeasibleError("second_variation: " + std::to_string(n) + " steps exceed the cap of " +
                          std::to_string(step_cap) + " (cost grows like n^3; raise the cap to accept ~" +
                          std::to_string(static_cast<long long>(n) * n * n / 3) +
                          " updates per trajectory)");
  SecondVariationTensor S(n);
  if (model.kind() == ModelKind::constant) return S;
  if (model.d() != 1 || model.m() != 1)
    throw std::invalid_argument("second_variation: scalar models only");

  const SchemeSweep sw = sweep(model, grid, dW, x0);
  const VariationTensor V = first_variation(model, grid, dW, x0);
  const UFeature uf = model.u_feature();
  std::vector<double> iu(n, 0.0);
  std::vector<double> iu2(static_cast<std::size_t>(n) * n, 0.0);

  auto u_tan = [&](int k, int l, const LagStencil& st) {
    switch (uf) {
      case UFeature::current: return V.at(k, l);
      case UFeature::lag:
        return st.w0 * V.at(k, st.idx0) + (st.idx1 >= 0 ? st.w1 * V.at(k, st.idx1) : 0.0);
      case UFeature::integral: return iu[k];
      case UFeature::none: return 0.0;
    }
    return 0.0;
  };

  for (int l = 0; l < n; ++l) {
    const auto& fs = sw.ds[l];
    const auto& fb = sw.db[l];
    const double dw = dW.at(l, 0);
    LagStencil st;
    if (uf == UFeature::lag) st = lag_stencil(model, grid, l);

    for (int k = 0; k < l; ++k) {
      const double udk = u_tan(k, l, st);
      const double vdk = V.at(k, l);
      for (int k2 = k; k2 < l; ++k2) {
        const double udk2 = u_tan(k2, l, st);
        const double vdk2 = V.at(k2, l);
        const double s_prev = S.at(k, k2, l);
        double u2 = 0.0;
        switch (uf) {
          case UFeature::current: u2 = s_prev; break;
          case UFeature::lag:
            u2 = st.w0 * S.at(k, k2, st.idx0) + (st.idx1 >= 0 ? st.w1 * S.at(k, k2, st.idx1) : 0.0);
            break;
          case UFeature::integral: u2 = iu2[static_cast<std::size_t>(k) * n + k2]; break;
          case UFeature::none: break;
        }
        const double cross_u = udk * vdk2 + vdk * udk2;
        const double drift2 = fb.fu * u2 + fb.fv * s_prev + fb.fuu * udk * udk2 +
                              fb.fuv * cross_u + fb.fvv * vdk * vdk2;
        const double diff2 = fs.fu * u2 + fs.fv * s_prev + fs.fuu * udk * udk2 +
                             fs.fuv * cross_u + fs.fvv * vdk * vdk2;
        const double val = s_prev + drift2 * grid.dt + diff2 * dw;
        S.at(k, k2, l + 1) = val;
        S.at(k2, k, l + 1) = val;
      }
      // Mixed pair (k, l): derivative of the new diffusion source.
      const double src = fs.fu * udk + fs.fv * vdk;
      S.at(k, l, l + 1) = src;
      S.at(l, k, l + 1) = src;
    }

    if (uf == UFeature::integral) {
      for (int k = 0; k <= l; ++k) {
        iu[k] += 0.5 * grid.dt * (V.at(k, l) + V.at(k, l + 1));
        for (int k2 = 0; k2 <= l; ++k2)
          iu2[static_cast<std::size_t>(k) * n + k2] +=
              0.5 * grid.dt * (S.at(k, k2, l) + S.at(k, k2, l + 1));
      }
    }
  }
  return S;
}

FunctionalState terminal_state(const CoefficientModel& model, const TimeGrid& grid,
                               const IncrementMatrix& dW, const std::vector<double>& x0,
                               bool with_hessian, int hessian_step_cap) {
  const int n = grid.steps, d = model.d(), m = model.m();
  const DiscretePath path = solve(model, grid, dW, x0);
  const VariationTensor V = first_variation(model, grid, dW, x0);

  FunctionalState st;
  st.value.resize(d);
  for (int i = 0; i < d; ++i) st.value[i] = path.at(n, i);
  st.grad.reserve(d);
  for (int i = 0; i < d; ++i) st.grad.push_back(V.terminal_gradient(i));
  if (with_hessian) {
    if (d != 1 || m != 1)
      throw std::invalid_argument("terminal_state: Hessian data is scalar-model only");
    const SecondVariationTensor S = second_variation(model, grid, dW, x0, hessian_step_cap);
    HessianField h(n, 1);
    for (int k = 0; k < n; ++k)
      for (int k2 = 0; k2 < n; ++k2) h.at(k, 0, k2, 0) = S.at(k, k2, n);
    st.hess.push_back(std::move(h));
  }
  return st;
}

IbpContractions ibp_contractions(const CoefficientModel& model, const TimeGrid& grid,
                                 const IncrementMatrix& dW, const std::vector<double>& x0) {
  const int n = grid.steps;
  if (model.d() != 1 || model.m() != 1)
    throw std::invalid_argument("ibp_contractions: scalar models only");

  IbpContractions out;
  out.gradient.assign(n, 0.0);

  if (model.kind() == ModelKind::constant) {
    const SchemeSweep sw = sweep(model, grid, dW, x0);
    out.value = sw.path.at(n);
    for (int k = 0; k < n; ++k) out.gradient[k] = sw.sigma[k];
    for (int k = 0; k < n; ++k) out.covariance += out.gradient[k] * out.gradient[k] * grid.dt;
    return out;
  }

  const SchemeSweep sw = sweep(model, grid, dW, x0);
  const UFeature uf = model.u_feature();
  out.value = sw.path.at(n);

  // Pass A: first variation fused with the diagonal of the second.
  std::vector<double> V(static_cast<std::size_t>(n) * (n + 1), 0.0);   // [k][l]
  std::vector<double> D2(static_cast<std::size_t>(n) * (n + 1), 0.0);  // [k][l] diagonal
  auto v_at = [&V, n](int k, int l) -> double& {
    return V[static_cast<std::size_t>(k) * (n + 1) + l];
  };
  auto d2_at = [&D2, n](int k, int l) -> double& {
    return D2[static_cast<std::size_t>(k) * (n + 1) + l];
  };
  std::vector<double> iu(n, 0.0), idd(n, 0.0);

  std::vector<LagStencil> stencils(uf == UFeature::lag ? n : 0);
  if (uf == UFeature::lag)
    for (int l = 0; l < n; ++l) stencils[l] = lag_stencil(model, grid, l);

  for (int l = 0; l < n; ++l) {
    const auto& fs = sw.ds[l];
    const auto& fb = sw.db[l];
    const double dw = dW.at(l, 0);
    const LagStencil st = (uf == UFeature::lag) ? stencils[l] : LagStencil{};

    for (int k = 0; k < l; ++k) {
      const double vdot = v_at(k, l);
      double udot = 0.0, u2 = 0.0;
      switch (uf) {
        case UFeature::current:
          udot = vdot;
          u2 = d2_at(k, l);
          break;
        case UFeature::lag:
          udot = st.w0 * v_at(k, st.idx0) + (st.idx1 >= 0 ? st.w1 * v_at(k, st.idx1) : 0.0);
          u2 = st.w0 * d2_at(k, st.idx0) + (st.idx1 >= 0 ? st.w1 * d2_at(k, st.idx1) : 0.0);
          break;
        case UFeature::integral:
          udot = iu[k];
          u2 = idd[k];
          break;
        case UFeature::none: break;
      }
      v_at(k, l + 1) = vdot + (fb.fu * udot + fb.fv * vdot) * grid.dt +
                       (fs.fu * udot + fs.fv * vdot) * dw;
      const double curv_b =
          fb.fuu * udot * udot + 2.0 * fb.fuv * udot * vdot + fb.fvv * vdot * vdot;
      const double curv_s =
          fs.fuu * udot * udot + 2.0 * fs.fuv * udot * vdot + fs.fvv * vdot * vdot;
      d2_at(k, l + 1) = d2_at(k, l) + (fb.fu * u2 + fb.fv * d2_at(k, l) + curv_b) * grid.dt +
                        (fs.fu * u2 + fs.fv * d2_at(k, l) + curv_s) * dw;
    }
    v_at(l, l + 1) = fs.f;

    if (uf == UFeature::integral)
      for (int k = 0; k <= l; ++k) {
        iu[k] += 0.5 * grid.dt * (v_at(k, l) + v_at(k, l + 1));
        idd[k] += 0.5 * grid.dt * (d2_at(k, l) + d2_at(k, l + 1));
      }
  }

  for (int k = 0; k < n; ++k) {
    out.gradient[k] = v_at(k, n);
    out.covariance += out.gradient[k] * out.gradient[k] * grid.dt;
    out.trace_hess += d2_at(k, n);
  }

  // Pass B: second directional derivative along the terminal gradient.
  std::vector<double> Y(n + 1, 0.0), Z(n + 1, 0.0);
  double iy = 0.0, iz = 0.0;
  for (int l = 0; l < n; ++l) {
    const auto& fs = sw.ds[l];
    const auto& fb = sw.db[l];
    const double dw = dW.at(l, 0);
    const double vl = out.gradient[l];
    double yu = 0.0, zu = 0.0;
    switch (uf) {
      case UFeature::current:
        yu = Y[l];
        zu = Z[l];
        break;
      case UFeature::lag: {
        const LagStencil st = stencils[l];
        yu = st.w0 * Y[st.idx0] + (st.idx1 >= 0 ? st.w1 * Y[st.idx1] : 0.0);
        zu = st.w0 * Z[st.idx0] + (st.idx1 >= 0 ? st.w1 * Z[st.idx1] : 0.0);
        break;
      }
      case UFeature::integral:
        yu = iy;
        zu = iz;
        break;
      case UFeature::none: break;
    }
    const double curv_b = fb.fuu * yu * yu + 2.0 * fb.fuv * yu * Y[l] + fb.fvv * Y[l] * Y[l];
    const double curv_s = fs.fuu * yu * yu + 2.0 * fs.fuv * yu * Y[l] + fs.fvv * Y[l] * Y[l];
    Y[l + 1] = Y[l] + (fb.fu * yu + fb.fv * Y[l]) * grid.dt + (fs.fu * yu + fs.fv * Y[l]) * dw +
               fs.f * vl;
    Z[l + 1] = Z[l] + (fb.fu * zu + fb.fv * Z[l] + curv_b) * grid.dt +
               (fs.fu * zu + fs.fv * Z[l] + curv_s) * dw + 2.0 * (fs.fu * yu + fs.fv * Y[l]) * vl;
    if (uf == UFeature::integral) {
      iy += 0.5 * grid.dt * (Y[l] + Y[l + 1]);
      iz += 0.5 * grid.dt * (Z[l] + Z[l + 1]);
    }
  }
  out.quad_hess = Z[n];
  return out;
}

namespace {

void validate_ladder(StudyConfig& cfg) {
  if (cfg.coarse_steps.empty()) throw std::invalid_argument("study: empty resolution list");
  std::sort(cfg.coarse_steps.begin(), cfg.coarse_steps.end());  // rows sort by resolution
  int max_coarse = 0;
  for (int nc : cfg.coarse_steps) {
    if (nc < 1) throw std::invalid_argument("study: coarse step counts must be positive");
    if (cfg.fine_steps % nc != 0)
      throw std::invalid_argument("study: coarse resolution " + std::to_string(nc) +
                                  " does not divide the fine resolution " +
                                  std::to_string(cfg.fine_steps));
    max_coarse = std::max(max_coarse, nc);
  }
  if (cfg.fine_steps < 8 * max_coarse)
    throw std::invalid_argument("study: fine resolution must be at least 8x the coarsest ladder rung");
  if (cfg.num_paths < 2) throw std::invalid_argument("study: need at least 2 paths");
}

RateTable reduce_ladder(const std::vector<int>& steps, const std::vector<std::vector<double>>& per_path,
                        std::size_t offset, std::size_t stride, double p, bool root,
                        std::uint64_t seed) {
  RateTable table;
  table.seed = seed;
  double max_err = 0.0;
  for (std::size_t lev = 0; lev < steps.size(); ++lev) {
    const MeanVar mv = mean_var(per_path.begin(), per_path.end(),
                                [&](const std::vector<double>& r) { return r[offset + lev * stride]; });
    RatePoint pt;
    pt.level = static_cast<double>(lev);
    pt.resolution = steps[lev];
    if (root) {
      pt.error = std::pow(mv.mean, 1.0 / p);
      pt.stderr_ = mv.mean > 0.0
                       ? mv.stderr_of_mean() * std::pow(mv.mean, 1.0 / p - 1.0) / p
                       : 0.0;
    } else {
      pt.error = mv.mean;
      pt.stderr_ = mv.stderr_of_mean();
    }
    max_err = std::max(max_err, pt.error);
    table.rows.push_back(pt);
  }
  table.exact = max_err <= 1e-10;
  if (!table.exact) table.fit = fit_log2_rows(table.rows);
  return table;
}

}  // namespace

StrongStudyResult strong_error_study(const CoefficientModel& model,
                                     const std::vector<double>& x0, double horizon,
                                     const StudyConfig& study_cfg) {
  StudyConfig cfg = study_cfg;
  validate_ladder(cfg);
  const TimeGrid fine = make_grid(horizon, cfg.fine_steps);
  const int d = model.d(), m = model.m();
  const std::size_t levels = cfg.coarse_steps.size();

  std::vector<TimeGrid> coarse_grids;
  for (int nc : cfg.coarse_steps) coarse_grids.push_back(make_grid(horizon, nc));

  auto per_path = [&](std::size_t idx) -> std::vector<double> {
    const IncrementMatrix zf = sample_increments(cfg.seed, idx, fine, m);
    const SchemeSweep fs = sweep(model, fine, zf, x0);
    std::vector<double> rec(2 * levels, 0.0);

    for (std::size_t lev = 0; lev < levels; ++lev) {
      const TimeGrid& cg = coarse_grids[lev];
      const int factor = cfg.fine_steps / cg.steps;
      const IncrementMatrix zc = coarsen(zf, factor);
      const SchemeSweep cs = sweep(model, cg, zc, x0);

      double sup_err = 0.0, max_cell_sq = 0.0;
      std::vector<double> partial(m), interp(d);
      for (int big = 0; big < cg.steps; ++big) {
        std::fill(partial.begin(), partial.end(), 0.0);
        const double left = cg.nodes[big];
        for (int q = 1; q <= factor; ++q) {
          const int fi = big * factor + q;
          for (int j = 0; j < m; ++j) partial[j] += zf.at(fi - 1, j);
          const double t = fine.nodes[fi];
          double cell_sq = 0.0, err_sq = 0.0;
          for (int i = 0; i < d; ++i) {
            double x = cs.path.at(big, i) + cs.drift[static_cast<std::size_t>(big) * d + i] * (t - left);
            for (int j = 0; j < m; ++j)
              x += cs.sigma[(static_cast<std::size_t>(big) * d + i) * m + j] * partial[j];
            const double inc = x - cs.path.at(big, i);
            const double err = x - fs.path.at(fi, i);
            cell_sq += inc * inc;
            err_sq += err * err;
          }
          max_cell_sq = std::max(max_cell_sq, cell_sq);
          sup_err = std::max(sup_err, std::sqrt(err_sq));
        }
      }
      rec[2 * lev] = std::pow(sup_err, cfg.p);
      rec[2 * lev + 1] = max_cell_sq;
    }
    return rec;
  };

  const auto results = mc_map<std::vector<double>>(cfg.num_paths, cfg.workers, per_path);

  StrongStudyResult out;
  out.errors = reduce_ladder(cfg.coarse_steps, results, 0, 2, cfg.p, true, cfg.seed);
  out.increments = reduce_ladder(cfg.coarse_steps, results, 1, 2, 1.0, false, cfg.seed);
  return out;
}

RateTable derivative_error_study(const CoefficientModel& model, const std::vector<double>& x0,
                                 double horizon, const StudyConfig& study_cfg) {
  StudyConfig cfg = study_cfg;
  validate_ladder(cfg);
  if (model.d() != 1 || model.m() != 1)
    throw std::invalid_argument("derivative_error_study: scalar models only");
  if (cfg.fine_steps > 2048)
    throw InfeasibleError("derivative_error_study: fine resolution above 2048 needs ~" +
                          std::to_string(static_cast<long long>(cfg.fine_steps) * cfg.fine_steps * 8 /
                                         (1 << 20)) +
                          " MiB per trajectory for the variation tensor");

  const TimeGrid fine = make_grid(horizon, cfg.fine_steps);
  const std::size_t levels = cfg.coarse_steps.size();
  std::vector<TimeGrid> coarse_grids;
  for (int nc : cfg.coarse_steps) coarse_grids.push_back(make_grid(horizon, nc));

  auto per_path = [&](std::size_t idx) -> std::vector<double> {
    const IncrementMatrix zf = sample_increments(cfg.seed, idx, fine, 1);
    const DiscretePath xf = solve(model, fine, zf, x0);
    const VariationTensor vf = first_variation(model, fine, zf, x0);
    std::vector<double> rec(2 * levels, 0.0);

    for (std::size_t lev = 0; lev < levels; ++lev) {
      const TimeGrid& cg = coarse_grids[lev];
      const int factor = cfg.fine_steps / cg.steps;
      const IncrementMatrix zc = coarsen(zf, factor);
      const DiscretePath xc = solve(model, cg, zc, x0);
      const VariationTensor vc = first_variation(model, cg, zc, x0);

      double sup_x = 0.0, sup_d = 0.0;
      for (int L = 1; L <= cg.steps; ++L) {
        const int q = L * factor;
        sup_x = std::max(sup_x, std::abs(xc.at(L) - xf.at(q)));
        double h2 = 0.0;
        for (int K = 0; K < L; ++K) {
          double avg = 0.0;
          for (int r = 0; r < factor; ++r) avg += vf.at(K * factor + r, q);
          avg /= factor;
          const double diff = vc.at(K, L) - avg;
          h2 += diff * diff * cg.dt;
        }
        sup_d = std::max(sup_d, std::sqrt(h2));
      }
      rec[2 * lev] = std::pow(sup_x, cfg.p);
      rec[2 * lev + 1] = std::pow(sup_d, cfg.p);
    }
    return rec;
  };

  const auto results = mc_map<std::vector<double>>(cfg.num_paths, cfg.workers, per_path);

  RateTable table;
  table.seed = cfg.seed;
  double max_err = 0.0;
  for (std::size_t lev = 0; lev < levels; ++lev) {
    const MeanVar mv_x = mean_var(results.begin(), results.end(),
                                  [&](const std::vector<double>& r) { return r[2 * lev]; });
    const MeanVar mv_d = mean_var(results.begin(), results.end(),
                                  [&](const std::vector<double>& r) { return r[2 * lev + 1]; });
    auto lp = [&cfg](const MeanVar& mv) {
      return mv.mean > 0.0 ? std::pow(mv.mean, 1.0 / cfg.p) : 0.0;
    };
    auto lp_se = [&cfg](const MeanVar& mv) {
      return mv.mean > 0.0 ? mv.stderr_of_mean() * std::pow(mv.mean, 1.0 / cfg.p - 1.0) / cfg.p
                           : 0.0;
    };
    RatePoint pt;
    pt.level = static_cast<double>(lev);
    pt.resolution = cfg.coarse_steps[lev];
    pt.error = lp(mv_x) + lp(mv_d);
    pt.stderr_ = lp_se(mv_x) + lp_se(mv_d);
    max_err = std::max(max_err, pt.error);
    table.rows.push_back(pt);
  }
  table.exact = max_err <= 1e-10;
  if (!table.exact) table.fit = fit_log2_rows(table.rows);
  return table;
}

}  // namespace pdm
