#pragma once

// Study drivers on top of the runner: single runs with persistence, the
// kappa-continuation study, grid self-convergence, the diffuse vs sharp
// interface comparison and the invariant suite used by `check`.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "martensite/config.hpp"
#include "martensite/diagnostics.hpp"
#include "martensite/initial_data.hpp"
#include "martensite/io.hpp"
#include "martensite/runner.hpp"
#include "martensite/sharp_interface.hpp"

namespace martensite {

struct StudySpec {
  Scenario scenario;
  std::optional<std::filesystem::path> out;  ///< nothing is written when empty
};

/// Every value the scenario resolved to, in a fixed order.
inline std::string resolved_echo(const Scenario& s) {
  std::ostringstream o;
  auto num = [](double v) { return format_double(v); };
  auto list = [&](const std::vector<double>& v) {
    std::string r;
    for (double x : v) r += (r.empty() ? "" : " ") + num(x);
    return r;
  };
  const auto& p = s.params;
  const Mat6& D = p.D.mandel();
  std::vector<double> upper;
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) upper.push_back(D(i, j));
  o << "a = " << num(s.a) << "\nd = " << num(s.d) << "\nN = " << s.nodes << "\n";
  o << "c = " << num(p.c) << "\nnu = " << num(p.nu) << "\nkappa = " << num(p.kappa) << "\n";
  o << "theta = " << num(p.well.theta()) << "\ntilt = " << num(p.well.tilt()) << "\n";
  o << "D = " << list(upper) << "\n";
  o << "misfit = " << list({p.misfit.a11, p.misfit.a22, p.misfit.a33, p.misfit.a12, p.misfit.a13, p.misfit.a23}) << "\n";
  o << "t_end = " << num(s.run.t_end) << "\ndt = " << num(s.run.dt) << "\ncfl = " << num(s.run.cfl_safety) << "\n";
  o << "mode = " << (s.run.mode == StepMode::Explicit ? "explicit" : "semi-implicit") << "\n";
  o << "fixed_point = " << (s.run.fixed_point ? "true" : "false") << "\n";
  o << "fixed_point_tol = " << num(s.run.fixed_point_tol) << "\nfixed_point_max_iter = " << s.run.fixed_point_max_iter << "\n";
  o << "mollify = " << (s.run.mollify ? "true" : "false") << "\noutput_stride = " << s.run.output_stride << "\n";
  o << "initial = " << s.initial.kind << "\nbump_center = " << num(s.initial.center)
    << "\nbump_halfwidth = " << num(s.initial.halfwidth) << "\nbump_amplitude = " << num(s.initial.amplitude)
    << "\ninterface = " << num(s.initial.interface) << "\norientation = " << s.initial.orientation << "\n";
  o << "load = " << list({s.load(0), s.load(1), s.load(2)}) << "\n";
  o << "seed = " << s.seed << "\nkappa_sequence = " << list(s.kappa_sequence)
    << "\ngrid_sequence = " << list(s.grid_sequence) << "\nnu_sequence = " << list(s.nu_sequence)
    << "\nviscosity_functions = " << s.viscosity_functions << "\nsharp_dt = " << num(s.sharp_dt)
    << "\nrandom_initial_count = " << s.random_initial_count << "\n";
  return o.str();
}

/// Writes config echo, diagnostics CSV, snapshots and the monitor summary.
inline void write_run(const std::filesystem::path& dir, const Scenario& s, const RunResult& r,
                      const Grid1D& grid) {
  std::filesystem::create_directories(dir / "snapshots");
  write_text(dir / "config.txt", resolved_echo(s));
  write_diagnostics_csv(dir / "diagnostics.csv", r.report);
  for (std::size_t k = 0; k < r.frames.size(); ++k)
    write_snapshot_csv(dir / "snapshots" / snapshot_name(k), r.frames[k], grid);
  write_summary(dir / "summary.txt", r.report.monitors);
}

inline RunResult run_scenario(const Scenario& s, const RunOptions& options = {}) {
  const Grid1D grid = s.grid();
  return run(make_initial(s, grid), s.body_force(), s.params, s.run, grid, options);
}

inline RunResult run_study(const StudySpec& spec) {
  const RunResult r = run_scenario(spec.scenario);
  if (spec.out) write_run(*spec.out, spec.scenario, r, spec.scenario.grid());
  return r;
}

namespace detail {

inline double relative_spread(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
}

inline std::string indexed(const std::string& stem, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%02zu", i);
  return stem + buf;
}

}  // namespace detail

struct KappaRow {
  double kappa = 0.0;
  double d = 0.0;  ///< max over frames of ||S^kappa - S^previous kappa||_inf (0 for the first)
  double sup_abs_S = 0.0;
  double max_grad_norm_sq = 0.0;
  double max_holder = 0.0;  ///< alpha = 1/2
  double final_energy = 0.0;
};

struct KappaStudyResult {
  std::vector<KappaRow> rows;
  ViscositySummary viscosity;       ///< smallest kappa, scenario grid
  ViscositySummary viscosity_fine;  ///< smallest kappa, dx and dt halved
  double viscosity_ratio = 0.0;
  std::vector<MonitorResult> monitors;
  bool passed() const {
    return std::all_of(monitors.begin(), monitors.end(), [](const auto& m) { return m.passed; });
  }
};

inline SamplerConfig sampler_for(const Scenario& s) {
  SamplerConfig cfg;
  cfg.functions = s.viscosity_functions;
  cfg.seed = s.seed;
  return cfg;
}

/// Runs the smallest-kappa problem on the scenario grid and on the grid with
/// dx and dt halved, checking the viscosity inequalities on both lattices.
inline std::pair<ViscositySummary, ViscositySummary> viscosity_refinement(const Scenario& base, double kappa) {
  Scenario s = base;
  s.params = base.params.with_kappa(kappa);
  if (s.run.dt == 0.0) s.run.dt = kDefaultSemiImplicitDt;
  s.run.mode = StepMode::SemiImplicit;
  RunOptions opt;
  opt.keep_lattice = true;
  opt.keep_frames = false;
  const RunResult coarse = run_scenario(s, opt);
  const auto v0 = viscosity_check(coarse.lattice, s.params, s.grid(), sampler_for(s));
  Scenario f = s;
  f.nodes = 2 * (s.nodes - 1) + 1;
  f.run.dt = 0.5 * s.run.dt;
  const RunResult fine = run_scenario(f, opt);
  const auto v1 = viscosity_check(fine.lattice, f.params, f.grid(), sampler_for(f));
  return {v0, v1};
}

inline KappaStudyResult kappa_study(const StudySpec& spec) {
  const Scenario& base = spec.scenario;
  if (base.kappa_sequence.size() < 3) throw ConfigError("kappa-study needs at least 3 kappa values");
  if (base.run.mode == StepMode::Explicit && base.run.dt == 0.0)
    throw ConfigError("kappa-study compares frames at equal times and needs a fixed dt in explicit mode");
  const Grid1D grid = base.grid();

  KappaStudyResult res;
  std::vector<State> prev_frames;
  for (std::size_t n = 0; n < base.kappa_sequence.size(); ++n) {
    Scenario s = base;
    s.params = base.params.with_kappa(base.kappa_sequence[n]);
    const RunResult r = run_scenario(s);
    if (spec.out) write_run(*spec.out / detail::indexed("kappa", n), s, r, grid);

    KappaRow row;
    row.kappa = s.params.kappa;
    for (const auto& rec : r.report.records) {
      row.sup_abs_S = std::max(row.sup_abs_S, rec.sup_abs_S);
      row.max_grad_norm_sq = std::max(row.max_grad_norm_sq, rec.grad_norm_sq);
    }
    for (const auto& f : r.frames) row.max_holder = std::max(row.max_holder, holder_seminorm(f.S, grid, 0.5));
    row.final_energy = r.report.records.back().free_energy;
    if (n > 0) {
      if (prev_frames.size() != r.frames.size()) throw Error("kappa-study: frame counts differ between runs");
      for (std::size_t k = 0; k < r.frames.size(); ++k)
        row.d = std::max(row.d, max_abs_diff(r.frames[k].S, prev_frames[k].S));
    }
    prev_frames = r.frames;
    res.rows.push_back(row);
  }

  std::tie(res.viscosity, res.viscosity_fine) = viscosity_refinement(base, base.kappa_sequence.back());
  res.viscosity_ratio = res.viscosity_fine.max_violation > 0.0
                            ? res.viscosity.max_violation / res.viscosity_fine.max_violation
                            : std::numeric_limits<double>::infinity();

  // Monitors.
  bool monotone = true;
  double worst_step = 0.0;
  for (std::size_t n = 2; n < res.rows.size(); ++n) {
    if (!(res.rows[n].d < res.rows[n - 1].d)) monotone = false;
    worst_step = std::max(worst_step, res.rows[n].d / res.rows[n - 1].d);
  }
  const double d_last = res.rows.back().d;
  std::vector<double> sup, grad, hold;
  for (const auto& r : res.rows) {
    sup.push_back(r.sup_abs_S);
    grad.push_back(r.max_grad_norm_sq);
    hold.push_back(r.max_holder);
  }
  res.monitors.push_back({"kappa_differences_decreasing", monotone, worst_step, 1.0});
  res.monitors.push_back({"kappa_last_difference", d_last < 1e-2, d_last, 1e-2});
  res.monitors.push_back({"kappa_sup_spread", detail::relative_spread(sup) < 0.1, detail::relative_spread(sup), 0.1});
  res.monitors.push_back({"kappa_gradient_spread", detail::relative_spread(grad) < 0.1, detail::relative_spread(grad), 0.1});
  res.monitors.push_back({"kappa_holder_spread", detail::relative_spread(hold) < 0.2, detail::relative_spread(hold), 0.2});
  res.monitors.push_back({"viscosity_within_tol", res.viscosity.passed(), res.viscosity.max_violation, res.viscosity.tol});
  res.monitors.push_back({"viscosity_within_tol_fine", res.viscosity_fine.passed(), res.viscosity_fine.max_violation,
                          res.viscosity_fine.tol});
  res.monitors.push_back({"viscosity_halving_ratio", std::abs(res.viscosity_ratio - 2.0) <= 0.5, res.viscosity_ratio, 0.5});

  if (spec.out) {
    std::filesystem::create_directories(*spec.out);
    CsvWriter csv(*spec.out / "kappa_study.csv",
                  {"n", "kappa", "d", "sup_abs_S", "max_grad_norm_sq", "max_holder_half", "final_energy"});
    for (std::size_t n = 0; n < res.rows.size(); ++n) {
      const auto& r = res.rows[n];
      csv.row({static_cast<double>(n), r.kappa, r.d, r.sup_abs_S, r.max_grad_norm_sq, r.max_holder, r.final_energy});
    }
    CsvWriter vis(*spec.out / "viscosity.csv",
                  {"level", "functions", "max_points", "min_points", "unconfirmed", "max_violation",
                   "max_sub_violation", "max_super_violation", "max_abs_hamiltonian", "tol"});
    int level = 0;
    for (const auto* v : {&res.viscosity, &res.viscosity_fine})
      vis.row({static_cast<double>(level++), static_cast<double>(v->functions), static_cast<double>(v->max_points),
               static_cast<double>(v->min_points), static_cast<double>(v->unconfirmed), v->max_violation,
               v->max_sub_violation, v->max_super_violation, v->max_abs_hamiltonian, v->tol});
    write_summary(*spec.out / "summary.txt", res.monitors);
  }
  return res;
}

struct GridRow {
  std::size_t nodes = 0;
  double diff_to_next = 0.0;  ///< max over coarse nodes of |S_N - S_next| at t_end
  double order = 0.0;         ///< log2(diff_k / diff_{k+1}); NaN where undefined
};

struct GridStudyResult {
  std::vector<GridRow> rows;
  double finest_order = 0.0;
};

/// Triple-grid Richardson self-convergence of S(t_end) with a common dt.
/// Each grid must halve the spacing of the previous one.
inline GridStudyResult grid_study(const StudySpec& spec) {
  const Scenario& base = spec.scenario;
  const auto& seq = base.grid_sequence;
  if (seq.size() < 3) throw ConfigError("grid-study needs at least 3 grids");
  for (std::size_t k = 1; k < seq.size(); ++k)
    if (seq[k] - 1.0 != 2.0 * (seq[k - 1] - 1.0))
      throw ConfigError("grid-study: each grid must halve the spacing of the previous one");

  Scenario s = base;
  if (s.run.dt == 0.0) {
    if (s.run.mode == StepMode::Explicit) {
      // The finest grid sets the common step.
      Scenario f = base;
      f.nodes = static_cast<std::size_t>(seq.back());
      const Grid1D g = f.grid();
      State st;
      st.S = prepare_initial(make_initial(f, g), f.params.kappa, g);
      st.elastic = elastic_state(st.S, f.body_force().sample(g, 0.0), f.params, g);
      s.run.dt = f.run.cfl_safety * explicit_stability_limit(st, f.params, g);
    } else {
      s.run.dt = kDefaultSemiImplicitDt;
    }
  }

  std::vector<Field> finals;
  for (double n : seq) {
    Scenario m = s;
    m.nodes = static_cast<std::size_t>(n);
    RunOptions opt;
    opt.keep_frames = false;
    State last;
    opt.sink.on_frame = [&](const State& f) { last = f; };
    const RunResult r = run_scenario(m, opt);
    (void)r;
    finals.push_back(last.S);
  }

  GridStudyResult res;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    GridRow row;
    row.nodes = static_cast<std::size_t>(seq[k]);
    row.order = std::numeric_limits<double>::quiet_NaN();
    if (k + 1 < seq.size()) {
      const std::size_t coarse = static_cast<std::size_t>(seq[0]);
      const std::size_t sa = (finals[k].size() - 1) / (coarse - 1);
      const std::size_t sb = (finals[k + 1].size() - 1) / (coarse - 1);
      for (std::size_t i = 0; i < coarse; ++i)
        row.diff_to_next = std::max(row.diff_to_next, std::abs(finals[k][i * sa] - finals[k + 1][i * sb]));
    }
    res.rows.push_back(row);
  }
  for (std::size_t k = 0; k + 2 < seq.size(); ++k) {
    const double e0 = res.rows[k].diff_to_next, e1 = res.rows[k + 1].diff_to_next;
    res.rows[k].order = (e0 > 0.0 && e1 > 0.0) ? std::log2(e0 / e1) : std::numeric_limits<double>::quiet_NaN();
  }
  res.finest_order = res.rows[seq.size() - 3].order;

  if (spec.out) {
    std::filesystem::create_directories(*spec.out);
    CsvWriter csv(*spec.out / "grid_study.csv", {"N", "diff_to_next", "order"});
    for (const auto& r : res.rows) csv.row({static_cast<double>(r.nodes), r.diff_to_next, r.order});
  }
  return res;
}

struct SharpCompareRow {
  double nu = 0.0;
  double max_error = 0.0;
  double final_error = 0.0;
  double dx = 0.0;
  bool stationary = false;
  std::vector<PositionError> errors;
  SharpTrajectory sharp;
};

struct SharpCompareResult {
  std::vector<SharpCompareRow> rows;
  std::vector<MonitorResult> monitors;
  bool passed() const {
    return std::all_of(monitors.begin(), monitors.end(), [](const auto& m) { return m.passed; });
  }
};

/// A stationary configuration has |V| below this threshold at t = 0.
inline constexpr double kStationarySpeed = 1e-12;

/// Diffuse runs from a tanh profile for every nu of the sequence against the
/// sharp-interface trajectory from the same initial position.
inline SharpCompareResult sharp_compare(const StudySpec& spec) {
  Scenario base = spec.scenario;
  base.initial.kind = "tanh";
  const Grid1D grid = base.grid();
  SharpCompareResult res;
  for (std::size_t n = 0; n < base.nu_sequence.size(); ++n) {
    Scenario s = base;
    s.params = base.params.with_nu(base.nu_sequence[n]);
    const SharpState s0{0.0, s.initial.interface, s.initial.orientation};
    SharpCompareRow row;
    row.nu = s.params.nu;
    row.dx = grid.dx();
    row.sharp = integrate_sharp(s0, s.run.t_end, s.sharp_dt, s.body_force(), s.params, grid);
    row.stationary = std::abs(row.sharp.samples.front().V) < kStationarySpeed;
    const RunResult r = run_scenario(s);
    row.errors = compare_diffuse_sharp(r.frames, grid, row.sharp);
    for (const auto& e : row.errors) row.max_error = std::max(row.max_error, e.error);
    row.final_error = row.errors.back().error;

    if (spec.out) {
      const auto dir = *spec.out / detail::indexed("nu", n);
      write_run(dir, s, r, grid);
      CsvWriter tr(dir / "sharp_trajectory.csv", {"t", "z", "V", "driving_force"});
      for (const auto& p : row.sharp.samples) tr.row({p.t, p.z, p.V, p.driving});
      CsvWriter pe(dir / "position_error.csv", {"t", "z_diffuse", "z_sharp", "error"});
      for (const auto& e : row.errors) pe.row({e.t, e.z_diffuse, e.z_sharp, e.error});
    }
    res.rows.push_back(std::move(row));
  }

  for (std::size_t n = 0; n < res.rows.size(); ++n) {
    const auto& r = res.rows[n];
    if (r.stationary)
      res.monitors.push_back({detail::indexed("stationary_error_nu", n), r.max_error <= r.dx, r.max_error, r.dx});
  }
  const bool moving = !res.rows.empty() && !res.rows.front().stationary;
  if (moving && res.rows.size() > 1) {
    bool dec_final = true, dec_max = true;
    for (std::size_t n = 1; n < res.rows.size(); ++n) {
      dec_final = dec_final && res.rows[n].final_error < res.rows[n - 1].final_error;
      dec_max = dec_max && res.rows[n].max_error < res.rows[n - 1].max_error;
    }
    res.monitors.push_back({"moving_final_error_decreasing", dec_final, res.rows.back().final_error,
                            res.rows.front().final_error});
    res.monitors.push_back({"moving_max_error_decreasing", dec_max, res.rows.back().max_error,
                            res.rows.front().max_error});
  }
  if (spec.out) {
    std::filesystem::create_directories(*spec.out);
    CsvWriter csv(*spec.out / "sharp_compare.csv", {"nu", "max_error", "final_error", "dx", "stationary"});
    for (const auto& r : res.rows) csv.row({r.nu, r.max_error, r.final_error, r.dx, r.stationary ? 1.0 : 0.0});
    write_summary(*spec.out / "summary.txt", res.monitors);
  }
  return res;
}

/// Largest nodewise value of (psi_S - nu d2S) H_T over every output frame,
/// relative to the largest magnitude seen. The product is -c X^2 |dS| <= 0.
inline double dissipation_sign_excess(const RunResult& r, const MaterialParams& p, const Grid1D& grid) {
  double worst = 0.0;
  for (const auto& f : r.frames) {
    const Field rate = rhs_sharp(f.S, f.elastic.T, p, grid);
    const Field prod = dissipation_products(f.S, f.elastic.T, rate, p, grid);
    double scale = 0.0, top = -std::numeric_limits<double>::infinity();
    for (double v : prod) {
      scale = std::max(scale, std::abs(v));
      top = std::max(top, v);
    }
    if (scale > 0.0) worst = std::max(worst, top / scale);
  }
  return worst;
}

struct CheckResult {
  std::vector<MonitorResult> monitors;
  bool passed() const {
    return std::all_of(monitors.begin(), monitors.end(), [](const auto& m) { return m.passed; });
  }
};

/// Full invariant suite on a scenario: run monitors, maximum principle over
/// random compatible data, energy decay at half the explicit stability limit,
/// the dissipation sign, and (for tanh data) the sharp-interface comparison,
/// otherwise the kappa study.
inline CheckResult check(const StudySpec& spec) {
  const Scenario& s = spec.scenario;
  const Grid1D grid = s.grid();
  CheckResult out;
  auto add = [&](const std::vector<MonitorResult>& ms, const std::string& prefix) {
    for (auto m : ms) {
      m.name = prefix + m.name;
      out.monitors.push_back(m);
    }
  };

  const RunResult base = run_scenario(s);
  if (spec.out) write_run(*spec.out / "run", s, base, grid);
  add(base.report.monitors, "run.");
  const double sign = dissipation_sign_excess(base, s.params, grid);
  out.monitors.push_back({"run.dissipation_sign", sign <= 1e-12, sign, 1e-12});

  for (std::size_t k = 0; k < s.random_initial_count; ++k) {
    const RunResult r = run(random_initial(s.seed + 1 + k, grid), s.body_force(), s.params, s.run, grid);
    for (const auto& m : r.report.monitors)
      if (m.name.rfind("max_principle", 0) == 0)
        out.monitors.push_back({detail::indexed("random", k) + "." + m.name, m.passed, m.value, m.threshold});
  }

  if (s.load.isZero(0.0)) {
    RunConfig ex = s.run;
    ex.mode = StepMode::Explicit;
    ex.dt = 0.0;
    ex.cfl_safety = 0.5;
    const RunResult r = run(make_initial(s, grid), s.body_force(), s.params, ex, grid);
    for (const auto& m : r.report.monitors)
      if (m.name == "energy_nonincreasing") out.monitors.push_back({"explicit_half_limit." + m.name, m.passed, m.value, m.threshold});
  }

  StudySpec sub = spec;
  if (s.initial.kind == "tanh") {
    if (spec.out) sub.out = *spec.out / "sharp_compare";
    add(sharp_compare(sub).monitors, "sharp.");
  } else {
    if (spec.out) sub.out = *spec.out / "kappa_study";
    add(kappa_study(sub).monitors, "kappa.");
  }
  if (spec.out) write_summary(*spec.out / "summary.txt", out.monitors);
  return out;
}

}  // namespace martensite
