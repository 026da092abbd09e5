// Command-line driver.
//   exit 0: success, 1: a monitor failed or the run broke down, 2: bad configuration.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "martensite/martensite.hpp"

namespace {

using namespace martensite;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::int64_t> seed;
  std::optional<double> kappa;
  std::optional<std::int64_t> grid;
};

Scenario load_scenario(const Options& o) {
  Config cfg = o.config.empty() ? Config::parse_string("", "<defaults>") : Config::load(o.config);
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  if (o.kappa) cfg.set("kappa", format_double(*o.kappa));
  if (o.grid) cfg.set("N", std::to_string(*o.grid));  // the default grid_sequence follows N
  return scenario_from_config(cfg);
}

StudySpec make_spec(const Options& o) {
  StudySpec spec{load_scenario(o), std::nullopt};
  if (!o.out.empty()) spec.out = o.out;
  return spec;
}

void print(const std::vector<MonitorResult>& ms) {
  for (const auto& m : ms)
    std::printf("%-40s %s  value=%.6g  threshold=%.6g\n", m.name.c_str(), m.passed ? "PASS" : "FAIL", m.value,
                m.threshold);
}

int cmd_run(const Options& o) {
  const StudySpec spec = make_spec(o);
  const RunResult r = run_study(spec);
  const auto& last = r.report.records.back();
  std::printf("steps=%zu  t=%.6g  energy %.10g -> %.10g  sup|S|=%.6g\n", r.steps, last.t, r.initial_energy,
              last.free_energy, last.sup_abs_S);
  print(r.report.monitors);
  return r.report.all_passed() ? 0 : 1;
}

int cmd_kappa(const Options& o) {
  const KappaStudyResult r = kappa_study(make_spec(o));
  std::printf("%3s %12s %12s %12s %12s %12s\n", "n", "kappa", "d_n", "sup|S|", "max|S_x|^2", "holder");
  for (std::size_t n = 0; n < r.rows.size(); ++n) {
    const auto& w = r.rows[n];
    std::printf("%3zu %12.6g %12.6g %12.6g %12.6g %12.6g\n", n, w.kappa, w.d, w.sup_abs_S, w.max_grad_norm_sq,
                w.max_holder);
  }
  std::printf("viscosity: coarse %.4g (tol %.4g), fine %.4g (tol %.4g), ratio %.3g\n", r.viscosity.max_violation,
              r.viscosity.tol, r.viscosity_fine.max_violation, r.viscosity_fine.tol, r.viscosity_ratio);
  print(r.monitors);
  return r.passed() ? 0 : 1;
}

int cmd_grid(const Options& o) {
  const GridStudyResult r = grid_study(make_spec(o));
  std::printf("%8s %14s %8s\n", "N", "diff_to_next", "order");
  for (const auto& w : r.rows) std::printf("%8zu %14.6g %8.3g\n", w.nodes, w.diff_to_next, w.order);
  std::printf("observed order (finest triple): %.3f\n", r.finest_order);
  return std::isfinite(r.finest_order) ? 0 : 1;
}

int cmd_sharp(const Options& o) {
  const SharpCompareResult r = sharp_compare(make_spec(o));
  std::printf("%12s %12s %12s %s\n", "nu", "max_error", "final_error", "");
  for (const auto& w : r.rows)
    std::printf("%12.6g %12.6g %12.6g %s%s\n", w.nu, w.max_error, w.final_error, w.stationary ? "stationary" : "",
                w.sharp.exited ? " (sharp front left the domain)" : "");
  print(r.monitors);
  return r.passed() ? 0 : 1;
}

int cmd_check(const Options& o) {
  const CheckResult r = check(make_spec(o));
  print(r.monitors);
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field martensite solver"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file");
    sub->add_option("--out", o.out, "output directory (nothing written if omitted)");
    sub->add_option("--seed", o.seed, "RNG seed override");
    sub->add_option("--kappa", o.kappa, "regularization kappa override");
    sub->add_option("--grid", o.grid, "number of grid nodes N override");
  };
  auto* run = app.add_subcommand("run", "single evolution");
  auto* kappa = app.add_subcommand("kappa-study", "kappa continuation and viscosity check");
  auto* grid = app.add_subcommand("grid-study", "triple-grid self-convergence");
  auto* sharp = app.add_subcommand("sharp-compare", "diffuse vs sharp interface positions");
  auto* chk = app.add_subcommand("check", "full invariant suite");
  for (auto* s : {run, kappa, grid, sharp, chk}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(o);
    if (kappa->parsed()) return cmd_kappa(o);
    if (grid->parsed()) return cmd_grid(o);
    if (sharp->parsed()) return cmd_sharp(o);
    return cmd_check(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
