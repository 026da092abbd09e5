#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <span>
#include <vector>

#include "martensite/diagnostics.hpp"
#include "martensite/elasticity.hpp"
#include "martensite/evolution.hpp"

namespace martensite {

/// Callbacks receiving output frames and per-step records as they are produced.
struct RunSink {
  std::function<void(const State&)> on_frame;
  std::function<void(const StepRecord&)> on_step;
};

struct RunResult {
  std::vector<State> frames;       ///< every output_stride steps, plus the final state
  std::vector<Frame> lattice;      ///< every step (only when requested)
  DiagnosticsReport report;
  std::size_t steps = 0;
  double initial_energy = 0.0;
  double max_dt = 0.0;
};

struct RunOptions {
  bool keep_lattice = false;  ///< store (t, S, T.eps_bar) every step for the viscosity checker
  bool keep_frames = true;
  RunSink sink;
};

inline constexpr double kDefaultSemiImplicitDt = 2.5e-3;

namespace detail {

inline bool all_finite(std::span<const double> f) {
  return std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace detail

/// Mollifies the load (if enabled), prepares compatible initial data and
/// advances to t_end, recording diagnostics every step.
inline RunResult run(std::span<const double> S0, const Load& load, const MaterialParams& params,
                     const RunConfig& config, const Grid1D& grid, const RunOptions& options = {}) {
  config.validate();
  params.validate();
  if (S0.size() != grid.size()) throw ConfigError("run: initial data does not match the grid");

  std::function<VecField(double)> load_at;
  if (config.mollify && !load.zero) {
    const double ht = params.kappa / 8.0;
    auto samples = std::make_shared<LoadSamples>(
        mollify(sample_load(load, grid, config.t_end + params.kappa, ht), params.kappa, grid));
    load_at = [samples](double t) { return samples->at(t); };
  } else {
    load_at = [&load, &grid](double t) { return load.sample(grid, t); };
  }

  RunResult result;
  State state;
  state.t = 0.0;
  state.S = prepare_initial(S0, params.kappa, grid);
  VecField b = load_at(0.0);
  state.elastic = elastic_state(state.S, b, params, grid);

  const double dx = grid.dx();
  const double s0_min = std::min(0.0, *std::min_element(state.S.begin(), state.S.end()));
  const double s0_max = std::max(0.0, *std::max_element(state.S.begin(), state.S.end()));
  const double sup_bound = std::max(-s0_min, s0_max);

  StepRecord rec;
  rec.sup_abs_S = max_abs(state.S);
  rec.grad_norm_sq = gradient_norm_sq(state.S, dx);
  rec.free_energy = total_free_energy(state, params, grid);
  result.initial_energy = rec.free_energy;
  result.report.records.push_back(rec);
  if (options.sink.on_step) options.sink.on_step(rec);
  if (options.keep_frames) result.frames.push_back(state);
  if (options.sink.on_frame) options.sink.on_frame(state);
  if (options.keep_lattice) result.lattice.push_back(make_frame(state, params));

  double max_increase = -std::numeric_limits<double>::infinity();
  double max_excess = 0.0;
  const double t_tol = 1e-12 * config.t_end;
  std::size_t n = 0;
  while (state.t < config.t_end - t_tol) {
    double dt = config.dt;
    if (dt == 0.0)
      dt = config.mode == StepMode::Explicit
               ? config.cfl_safety * explicit_stability_limit(state, params, grid)
               : kDefaultSemiImplicitDt;
    dt = std::min(dt, config.t_end - state.t);

    const VecField b_next = load_at(state.t + dt);
    State next;
    if (config.fixed_point) {
      next = fixed_point_step(state, dt, config.fixed_point_tol, params, grid, b_next,
                              config.fixed_point_max_iter)
                 .state;
    } else {
      next = step(state, dt, params, grid, config.mode, b_next);
    }
    if (std::abs(next.t - config.t_end) <= t_tol) next.t = config.t_end;
    ++n;

    if (!detail::all_finite(next.S))
      throw NonFinite("run: non-finite order parameter at step " + std::to_string(n));

    const double lo = std::min(0.0, *std::min_element(state.S.begin(), state.S.end()));
    const double hi = std::max(0.0, *std::max_element(state.S.begin(), state.S.end()));
    const double new_lo = *std::min_element(next.S.begin(), next.S.end());
    const double new_hi = *std::max_element(next.S.begin(), next.S.end());

    StepRecord r;
    r.step = n;
    r.t = next.t;
    r.dt = dt;
    r.sup_abs_S = max_abs(next.S);
    r.grad_norm_sq = gradient_norm_sq(next.S, dx);
    r.dissipation_integral = result.report.records.back().dissipation_integral +
                             dt * degenerate_dissipation(next.S, params.kappa, dx);
    r.free_energy = total_free_energy(next, params, grid);
    r.work_rate = work_rate(state, next, b_next, grid);
    r.dissipation_residual =
        (r.free_energy - result.report.records.back().free_energy) / dt - r.work_rate;
    r.max_principle_excess = std::max({0.0, new_hi - hi, lo - new_lo});
    for (double v : {r.sup_abs_S, r.grad_norm_sq, r.dissipation_integral, r.free_energy,
                     r.dissipation_residual, r.work_rate}) {
      if (!std::isfinite(v)) throw NonFinite("run: non-finite diagnostic at step " + std::to_string(n));
    }
    max_increase = std::max(max_increase, r.free_energy - result.report.records.back().free_energy);
    max_excess = std::max(max_excess, r.max_principle_excess);
    result.max_dt = std::max(result.max_dt, dt);

    result.report.records.push_back(r);
    if (options.sink.on_step) options.sink.on_step(r);
    state = std::move(next);

    const bool last = state.t >= config.t_end;
    if (options.keep_lattice) result.lattice.push_back(make_frame(state, params));
    if (n % config.output_stride == 0 || last) {
      if (options.keep_frames) result.frames.push_back(state);
      if (options.sink.on_frame) options.sink.on_frame(state);
    }
  }
  result.steps = n;

  double sup_all = 0.0;
  for (const auto& r : result.report.records) sup_all = std::max(sup_all, r.sup_abs_S);
  result.report.monitors.push_back(
      {"max_principle_sup", sup_all <= sup_bound + 1e-8, sup_all, sup_bound + 1e-8});
  result.report.monitors.push_back({"max_principle_step", max_excess <= 1e-10, max_excess, 1e-10});
  if (load.zero && n > 0) {
    const double thr = 1e-8 * std::max(result.initial_energy, 1.0);
    result.report.monitors.push_back({"energy_nonincreasing", max_increase <= thr, max_increase, thr});
  }
  if (result.frames.empty() || result.frames.back().t != state.t) {
    if (options.keep_frames) result.frames.push_back(state);
  }
  return result;
}

}  // namespace martensite
