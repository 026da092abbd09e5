#pragma once

// Flat key = value configuration. '#' starts a comment; blank lines are
// ignored; lists are whitespace separated. Unknown keys are rejected so that
// typos fail loudly. See README.md for the schema.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "martensite/errors.hpp"
#include "martensite/evolution.hpp"
#include "martensite/material.hpp"
#include "martensite/tensor.hpp"

namespace martensite {

class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>") {
    Config cfg;
    cfg.origin_ = origin;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
      if (!known_keys().count(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
      if (cfg.values_.count(key))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      cfg.values_[key] = value;
      cfg.order_.push_back(key);
    }
    return cfg;
  }

  static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
    std::istringstream in(text);
    return parse(in, origin);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
    if (!has(key)) order_.push_back(key);
    values_[key] = value;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::int64_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError(origin_ + ": '" + key + "' expects an integer, got '" + s + "'");
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError(origin_ + ": '" + key + "' expects true/false, got '" + it->second + "'");
  }

  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::istringstream in(it->second);
    std::string tok;
    while (in >> tok) out.push_back(to_double(key, tok));
    return out;
  }

  /// Resolved configuration in a canonical order, one key per line.
  std::string echo() const {
    std::ostringstream out;
    for (const auto& k : order_) out << k << " = " << values_.at(k) << "\n";
    return out.str();
  }

  const std::string& origin() const { return origin_; }

  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        // domain and grid
        "a", "d", "N",
        // material
        "c", "nu", "kappa", "theta", "tilt", "lambda", "mu", "D", "misfit",
        // time stepping
        "t_end", "dt", "cfl", "mode", "fixed_point", "fixed_point_tol", "fixed_point_max_iter",
        "mollify", "output_stride",
        // data
        "initial", "bump_center", "bump_halfwidth", "bump_amplitude", "interface", "orientation",
        "load",
        // studies
        "seed", "kappa_sequence", "grid_sequence", "viscosity_functions", "nu_sequence",
        "sharp_dt", "random_initial_count"};
    return keys;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  double to_double(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
      throw ConfigError(origin_ + ": '" + key + "' expects a number, got '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  std::string origin_;
};

/// Initial order parameter family.
struct InitialSpec {
  std::string kind = "bump";  ///< bump | tanh | zero
  double center = 0.5;
  double halfwidth = 0.25;
  double amplitude = 0.8;
  double interface = 0.5;  ///< tanh: centre of the front
  int orientation = 1;
};

/// Everything needed for a single run plus the study parameters.
struct Scenario {
  double a = 0.0, d = 1.0;
  std::size_t nodes = 201;
  MaterialParams params;
  RunConfig run;
  InitialSpec initial;
  Vec3 load = Vec3::Zero();  ///< constant body force
  std::uint64_t seed = 12345;
  std::vector<double> kappa_sequence;
  std::vector<double> grid_sequence;
  std::vector<double> nu_sequence{4e-3, 1e-3, 2.5e-4};
  std::size_t viscosity_functions = 200;
  double sharp_dt = 1e-3;
  std::size_t random_initial_count = 10;

  Grid1D grid() const { return Grid1D(a, d, nodes); }
  Load body_force() const {
    if (load.isZero(0.0)) return Load::none();
    const Vec3 b = load;
    return Load::from([b](double, double) { return b; });
  }
};

inline std::vector<double> default_kappa_sequence() {
  std::vector<double> k;
  for (int n = 0; n <= 4; ++n) k.push_back(0.2 * std::pow(2.0, -n));
  return k;
}

/// Builds and validates a scenario. Values not given fall back to the shipped
/// default scenario.
inline Scenario scenario_from_config(const Config& cfg) {
  Scenario s;
  const std::string& where = cfg.origin();
  try {
    s.a = cfg.get_double("a", 0.0);
    s.d = cfg.get_double("d", 1.0);
    const auto n = cfg.get_int("N", 201);
    if (n < 5) throw ConfigError("N must be at least 5");
    s.nodes = static_cast<std::size_t>(n);
    (void)s.grid();

    ElasticityTensor D = ElasticityTensor::isotropic(cfg.get_double("lambda", 1.0), cfg.get_double("mu", 1.0));
    if (cfg.has("D")) {
      if (cfg.has("lambda") || cfg.has("mu")) throw ConfigError("give either D or lambda/mu, not both");
      const auto v = cfg.get_list("D", {});
      if (v.size() != 21) throw ConfigError("D expects 21 upper-triangle Mandel entries");
      std::array<double, 21> up{};
      std::copy(v.begin(), v.end(), up.begin());
      D = ElasticityTensor::from_upper_triangle(up);
    }
    const auto m = cfg.get_list("misfit", {0.1, 0.0, 0.0, 0.0, 0.0, 0.0});
    if (m.size() != 6) throw ConfigError("misfit expects 6 entries: e11 e22 e33 e12 e13 e23");
    const SymMat3 misfit{m[0], m[1], m[2], m[3], m[4], m[5]};
    s.params = MaterialParams::make(cfg.get_double("c", 1.0), cfg.get_double("nu", 1e-3),
                                    cfg.get_double("kappa", 0.0125), misfit, D,
                                    DoubleWell(cfg.get_double("theta", 1.0), cfg.get_double("tilt", 0.0)));
    s.params.validate();

    s.run.t_end = cfg.get_double("t_end", 0.5);
    s.run.dt = cfg.get_double("dt", 0.0);
    s.run.cfl_safety = cfg.get_double("cfl", 0.5);
    const std::string mode = cfg.get_string("mode", "semi-implicit");
    if (mode == "semi-implicit")
      s.run.mode = StepMode::SemiImplicit;
    else if (mode == "explicit")
      s.run.mode = StepMode::Explicit;
    else
      throw ConfigError("mode must be 'semi-implicit' or 'explicit'");
    s.run.fixed_point = cfg.get_bool("fixed_point", false);
    s.run.fixed_point_tol = cfg.get_double("fixed_point_tol", 1e-10);
    s.run.fixed_point_max_iter = static_cast<int>(cfg.get_int("fixed_point_max_iter", 50));
    s.run.mollify = cfg.get_bool("mollify", false);
    const auto stride = cfg.get_int("output_stride", 20);
    if (stride < 1) throw ConfigError("output_stride must be at least 1");
    s.run.output_stride = static_cast<std::size_t>(stride);
    s.run.validate();

    s.initial.kind = cfg.get_string("initial", "bump");
    if (s.initial.kind != "bump" && s.initial.kind != "tanh" && s.initial.kind != "zero")
      throw ConfigError("initial must be bump, tanh or zero");
    s.initial.center = cfg.get_double("bump_center", 0.5 * (s.a + s.d));
    s.initial.halfwidth = cfg.get_double("bump_halfwidth", 0.25 * (s.d - s.a));
    s.initial.amplitude = cfg.get_double("bump_amplitude", 0.8);
    s.initial.interface = cfg.get_double("interface", 0.5 * (s.a + s.d));
    s.initial.orientation = static_cast<int>(cfg.get_int("orientation", 1));
    if (s.initial.orientation != 1 && s.initial.orientation != -1)
      throw ConfigError("orientation must be 1 or -1");
    if (!(s.initial.halfwidth > 0.0)) throw ConfigError("bump_halfwidth must be positive");

    const auto b = cfg.get_list("load", {0.0, 0.0, 0.0});
    if (b.size() != 3) throw ConfigError("load expects 3 entries: b1 b2 b3");
    s.load = Vec3(b[0], b[1], b[2]);

    const auto seed = cfg.get_int("seed", 12345);
    if (seed < 0) throw ConfigError("seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
    s.kappa_sequence = cfg.get_list("kappa_sequence", default_kappa_sequence());
    for (std::size_t i = 0; i < s.kappa_sequence.size(); ++i) {
      const double k = s.kappa_sequence[i];
      if (!(k > 0.0 && k < 1.0)) throw ConfigError("kappa_sequence entries must lie in (0,1)");
      if (i > 0 && !(k < s.kappa_sequence[i - 1]))
        throw ConfigError("kappa_sequence must be strictly decreasing");
    }
    s.grid_sequence = cfg.get_list("grid_sequence", {static_cast<double>(s.nodes),
                                                     static_cast<double>(2 * (s.nodes - 1) + 1),
                                                     static_cast<double>(4 * (s.nodes - 1) + 1)});
    for (double g : s.grid_sequence)
      if (!(g >= 5.0) || g != std::floor(g)) throw ConfigError("grid_sequence entries must be integers >= 5");
    s.nu_sequence = cfg.get_list("nu_sequence", s.nu_sequence);
    for (double v : s.nu_sequence)
      if (!(v > 0.0)) throw ConfigError("nu_sequence entries must be positive");
    const auto nf = cfg.get_int("viscosity_functions", 200);
    if (nf < 1) throw ConfigError("viscosity_functions must be at least 1");
    s.viscosity_functions = static_cast<std::size_t>(nf);
    s.sharp_dt = cfg.get_double("sharp_dt", 1e-3);
    if (!(s.sharp_dt > 0.0)) throw ConfigError("sharp_dt must be positive");
    const auto nr = cfg.get_int("random_initial_count", 10);
    if (nr < 0) throw ConfigError("random_initial_count must be non-negative");
    s.random_initial_count = static_cast<std::size_t>(nr);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(where, 0) == 0) throw;
    throw ConfigError(where + ": " + msg);
  } catch (const NonPositiveDefinite& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return s;
}

}  // namespace martensite
