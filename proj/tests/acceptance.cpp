// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "martensite/martensite.hpp"
#include "property_suites.hpp"

using namespace martensite;
namespace fs = std::filesystem;

namespace {

struct Line {
  bool pass;
  std::string detail;
};

char buf[512];

template <typename... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Scenario scenario(const std::string& text) { return scenario_from_config(Config::parse_string(text, "acceptance")); }

const char* kMovingFront =
    "N = 1601\nnu = 1e-3\nkappa = 1e-3\ntilt = -0.1\nt_end = 2\ndt = 1e-3\noutput_stride = 50\n"
    "initial = tanh\ninterface = 0.5\nnu_sequence = 4e-3 1e-3 2.5e-4\nsharp_dt = 1e-3\n";
const char* kStationaryFront =
    "N = 401\nmisfit = 0 0 0 0 0 0\nkappa = 1e-3\nt_end = 0.5\ndt = 1e-3\noutput_stride = 50\n"
    "initial = tanh\ninterface = 0.5\nnu_sequence = 4e-3 1e-3 2.5e-4\n";

Line elastic_equivalence() {
  const double diff = suites::elastic_equivalence(20, 2024, 201);
  const double order = suites::elastic_order(2024, 101);
  return {diff <= 1e-6 && std::abs(order - 2.0) <= 0.2,
          fmt("closed form vs direct: max relative diff %.3g (<= 1e-6), self-convergence order %.3f (2.0 +- 0.2)", diff,
              order)};
}

Line correction_parabola() {
  const auto p = MaterialParams::make(1.0, 1e-3, 0.1, SymMat3::diag(0.1, 0, 0), ElasticityTensor::isotropic(1.0, 1.0),
                                      DoubleWell());
  const Grid1D grid(0.0, 1.0, 101);
  const Vec3 b(0.7, -0.3, 0.2), diag(3.0, 1.0, 1.0);
  const auto corr = solve_correction(VecField(grid.size(), b), grid, p.projection, p.D);
  double err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    const Vec3 w = (b.array() / diag.array()).matrix() * 0.5 * x * (1.0 - x);
    err = std::max(err, (corr.w[i] - w).cwiseAbs().maxCoeff());
  }
  return {err <= 1e-10, fmt("constant-load parabola, N = 101: max error %.3g (<= 1e-10)", err)};
}

/// Worst bound excess over every step of a run started from S0.
double bound_excess(const Scenario& s, const Field& S0) {
  RunConfig cfg = s.run;
  cfg.output_stride = 1;
  const Grid1D grid = s.grid();
  const RunResult r = run(S0, s.body_force(), s.params, cfg, grid);
  const Field& init = r.frames.front().S;
  const double lo = std::min(0.0, *std::min_element(init.begin(), init.end()));
  const double hi = std::max(0.0, *std::max_element(init.begin(), init.end()));
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : r.frames)
    for (double v : f.S) worst = std::max({worst, v - hi, lo - v});
  return worst;
}

Line maximum_principle(const Scenario& s) {
  const Grid1D grid = s.grid();
  double worst = bound_excess(s, make_initial(s, grid));
  for (std::uint64_t k = 0; k < 10; ++k) worst = std::max(worst, bound_excess(s, random_initial(s.seed + 1 + k, grid)));
  return {worst <= 1e-8, fmt("default + 10 random data, every step: worst excess over the bounds %.3g (<= 1e-8)", worst)};
}

Line dissipation(const Scenario& s) {
  const Grid1D grid = s.grid();
  RunConfig ex = s.run;
  ex.mode = StepMode::Explicit;
  ex.dt = 0.0;
  ex.cfl_safety = 0.5;
  ex.output_stride = 1;
  const RunResult r = run(make_initial(s, grid), Load::none(), s.params, ex, grid);
  double increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < r.report.records.size(); ++k)
    increase = std::max(increase, r.report.records[k].free_energy - r.report.records[k - 1].free_energy);
  const double thr = 1e-8 * std::max(r.initial_energy, 1.0);
  double sign = dissipation_sign_excess(r, s.params, grid);
  for (std::uint64_t k = 0; k < 10; ++k) {
    RunConfig cfg = s.run;
    cfg.output_stride = 1;
    const RunResult rr = run(random_initial(s.seed + 1 + k, grid), Load::none(), s.params, cfg, grid);
    sign = std::max(sign, dissipation_sign_excess(rr, s.params, grid));
  }
  return {increase <= thr && sign <= 1e-12,
          fmt("dt = half the stability limit (%zu steps): max energy increase %.3g (<= %.3g); "
              "max relative positive product %.3g (<= 1e-12)",
              r.steps, increase, thr, sign)};
}

const MonitorResult* find(const std::vector<MonitorResult>& ms, const std::string& name) {
  for (const auto& m : ms)
    if (m.name == name) return &m;
  return nullptr;
}

Line kappa_continuation(const KappaStudyResult& k) {
  std::string d;
  for (std::size_t n = 1; n < k.rows.size(); ++n) d += fmt("%s%.3g", n > 1 ? ", " : "", k.rows[n].d);
  bool pass = true;
  for (const char* name : {"kappa_differences_decreasing", "kappa_last_difference", "kappa_sup_spread",
                           "kappa_gradient_spread"})
    pass = pass && find(k.monitors, name)->passed;
  return {pass, fmt("d_n = %s (decreasing, last < 1e-2); spread of sup|S| %.3g, of |dS|^2 %.3g (< 0.1)", d.c_str(),
                    find(k.monitors, "kappa_sup_spread")->value, find(k.monitors, "kappa_gradient_spread")->value)};
}

Line viscosity(const KappaStudyResult& k) {
  const auto& a = k.viscosity;
  const auto& b = k.viscosity_fine;
  const bool pass = a.passed() && b.passed() && std::abs(k.viscosity_ratio - 2.0) <= 0.5;
  return {pass, fmt("%zu functions: max violation %.4g (tol %.4g) -> %.4g (tol %.4g) after halving, ratio %.3f "
                    "(2 +- 0.5)",
                    a.functions, a.max_violation, a.tol, b.max_violation, b.tol, k.viscosity_ratio)};
}

Line sharp_reference() {
  const auto still = sharp_compare({scenario(kStationaryFront), std::nullopt});
  const auto moving = sharp_compare({scenario(kMovingFront), std::nullopt});
  double still_err = 0.0, dx = 0.0;
  for (const auto& r : still.rows) still_err = std::max(still_err, r.max_error), dx = r.dx;
  bool all_still = true;
  for (const auto& r : still.rows) all_still = all_still && r.stationary;
  std::string errs;
  for (const auto& r : moving.rows) errs += fmt("%s%.3g", errs.empty() ? "" : ", ", r.final_error);
  const bool dec = find(moving.monitors, "moving_final_error_decreasing") &&
                   find(moving.monitors, "moving_final_error_decreasing")->passed;
  return {all_still && still.passed() && dec,
          fmt("stationary: max error %.3g (<= dx = %.3g); moving, nu = 4e-3, 1e-3, 2.5e-4: final errors %s (decreasing)",
              still_err, dx, errs.c_str())};
}

Line property_suites() {
  const auto a = suites::projection_suite(1000, 20240601);
  const auto b = suites::double_well_suite(1000, 314159);
  const auto c = suites::hamiltonian_suite(1000, 271828);
  return {a.passed() && b.passed() && c.passed(),
          fmt("projection %zu/%zu, double well %zu/%zu, Hamiltonian bound %zu/%zu cases passed", a.cases - a.failures,
              a.cases, b.cases - b.failures, b.cases, c.cases - c.failures, c.cases)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Line determinism(const Scenario& s) {
  const fs::path root = fs::temp_directory_path() / "martensite_acceptance";
  fs::remove_all(root);
  run_study({s, root / "a"});
  run_study({s, root / "b"});
  const std::string a = slurp(root / "a" / "diagnostics.csv");
  const bool same = !a.empty() && a == slurp(root / "b" / "diagnostics.csv");
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    differing += slurp(e.path()) != slurp(root / "b" / fs::relative(e.path(), root / "a"));
  }
  fs::remove_all(root);
  return {same && differing == 0,
          fmt("two runs of the default config: diagnostics CSV %s, %zu/%zu output files identical",
              same ? "byte-identical" : "DIFFERS", files - differing, files)};
}

}  // namespace

int main() {
  const Scenario base = scenario("");
  int failed = 0;
  auto report = [&](int n, const char* title, const std::function<Line()>& f) {
    Line l;
    try {
      l = f();
    } catch (const std::exception& e) {
      l = {false, std::string("exception: ") + e.what()};
    }
    failed += !l.pass;
    std::printf("criterion %d %s  %s: %s\n", n, l.pass ? "PASS" : "FAIL", title, l.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "elastic representation", elastic_equivalence);
  report(2, "correction closed form", correction_parabola);
  report(3, "discrete maximum principle", [&] { return maximum_principle(base); });
  report(4, "dissipation", [&] { return dissipation(base); });
  KappaStudyResult k;
  bool have_k = false;
  report(5, "kappa continuation", [&] {
    k = kappa_study({base, std::nullopt});
    have_k = true;
    return kappa_continuation(k);
  });
  report(6, "viscosity inequalities", [&] {
    if (!have_k) throw Error("kappa study unavailable");
    return viscosity(k);
  });
  report(7, "sharp-interface reference", sharp_reference);
  report(8, "randomized invariant suites", property_suites);
  report(9, "determinism", [&] { return determinism(base); });
  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
