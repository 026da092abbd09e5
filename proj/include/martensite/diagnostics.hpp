#pragma once

// Executable counterparts of the analytical statements about the model:
// energy and dissipation monitors, a-priori bound monitors, and a sampled
// checker for the viscosity-solution inequalities.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "martensite/elasticity.hpp"
#include "martensite/evolution.hpp"
#include "martensite/grid.hpp"
#include "martensite/material.hpp"

namespace martensite {

/// Trapezoid integral of the free energy density. The strain is recovered from
/// the stress through the constitutive law, eps = D^{-1} T + eps_bar S, and the
/// gradient energy uses one-sided cell differences, nu/2 sum ((S_{i+1}-S_i)/dx)^2 dx.
inline double total_free_energy(const State& s, const MaterialParams& p, const Grid1D& grid) {
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  Field bulk(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SymMat3 eps = p.D.apply_inverse(s.elastic.T[i]) + s.S[i] * p.misfit;
    bulk[i] = free_energy_density(eps, s.S[i], 0.0, p);
  }
  double gradient = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double sx = (s.S[i + 1] - s.S[i]) / dx;
    gradient += sx * sx;
  }
  return trapezoid(bulk, dx) + 0.5 * p.nu * gradient * dx;
}

/// ||S_x||^2 with cell differences.
inline double gradient_norm_sq(std::span<const double> S, double dx) {
  double g = 0.0;
  for (std::size_t i = 0; i + 1 < S.size(); ++i) {
    const double sx = (S[i + 1] - S[i]) / dx;
    g += sx * sx;
  }
  return g * dx;
}

/// sum_i |dS|_k (d2S)^2 dx over interior nodes.
inline double degenerate_dissipation(std::span<const double> S, double kappa, double dx) {
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < S.size(); ++i) {
    const double q = (S[i + 1] - S[i - 1]) / (2.0 * dx);
    const double r = (S[i + 1] - 2.0 * S[i] + S[i - 1]) / (dx * dx);
    acc += abs_kappa(q, kappa) * r * r;
  }
  return acc * dx;
}

/// Power of the body force, int b . u_t dx with u_t a difference quotient.
inline double work_rate(const State& prev, const State& next, std::span<const Vec3> b,
                        const Grid1D& grid) {
  const double dt = next.t - prev.t;
  Field integrand(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    integrand[i] = b[i].dot(next.elastic.u[i] - prev.elastic.u[i]) / dt;
  return trapezoid(integrand, grid.dx());
}

/// (E(t_{n+1}) - E(t_n)) / dt - int b . u_t dx. The boundary flux
/// T^1 . u_t + nu S_t S_x drops out because u and S are pinned at zero there.
inline double dissipation_check(const State& prev, const State& next, std::span<const Vec3> b,
                                const MaterialParams& p, const Grid1D& grid) {
  const double dt = next.t - prev.t;
  return (total_free_energy(next, p, grid) - total_free_energy(prev, p, grid)) / dt -
         work_rate(prev, next, b, grid);
}

/// Nodewise products (psi_S - nu d2S) S_t at interior nodes for a given rate field.
inline Field dissipation_products(std::span<const double> S, const TensorField& T,
                                  std::span<const double> rate, const MaterialParams& p,
                                  const Grid1D& grid) {
  const double dx = grid.dx();
  Field out(grid.size(), 0.0);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double r = (S[i + 1] - 2.0 * S[i] + S[i - 1]) / (dx * dx);
    out[i] = (psi_S(dot(T[i], p.misfit), S[i], p) - p.nu * r) * rate[i];
  }
  return out;
}

/// Rate of the unregularized model, S_t = H_T(S, dS, d2S), at interior nodes.
inline Field rhs_sharp(std::span<const double> S, const TensorField& T, const MaterialParams& p,
                       const Grid1D& grid) {
  const double dx = grid.dx();
  Field out(grid.size(), 0.0);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double q = (S[i + 1] - S[i - 1]) / (2.0 * dx);
    const double r = (S[i + 1] - 2.0 * S[i] + S[i - 1]) / (dx * dx);
    out[i] = hamiltonian_sharp(dot(T[i], p.misfit), S[i], q, r, p);
  }
  return out;
}

/// With X = psi_S - nu d2S the regularized rate satisfies
///   X S_t = -c (|dS|_k - k) X^2 + c nu k d2S X.
/// Returns the second (possibly positive) term nodewise.
inline Field regularization_production(std::span<const double> S, const TensorField& T,
                                       const MaterialParams& p, const Grid1D& grid) {
  const double dx = grid.dx();
  Field out(grid.size(), 0.0);
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double r = (S[i + 1] - 2.0 * S[i] + S[i - 1]) / (dx * dx);
    const double x = psi_S(dot(T[i], p.misfit), S[i], p) - p.nu * r;
    out[i] = p.c * p.nu * p.kappa * r * x;
  }
  return out;
}

/// Discrete Hoelder seminorm max_{i<j} |S_i - S_j| / |x_i - x_j|^alpha.
inline double holder_seminorm(std::span<const double> S, const Grid1D& grid, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("holder seminorm: alpha must lie in (0,1]");
  double best = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i)
    for (std::size_t j = i + 1; j < S.size(); ++j)
      best = std::max(best, std::abs(S[i] - S[j]) /
                                std::pow(static_cast<double>(j - i) * grid.dx(), alpha));
  return best;
}

/// Smooth test function phi(t, x): a quadratic in (t, x) plus Gaussian bumps.
struct TestFunction {
  double c0 = 0.0, ct = 0.0, cx = 0.0, ctt = 0.0, ctx = 0.0, cxx = 0.0;
  struct Bump {
    double amp, t0, x0, st, sx;
  };
  std::vector<Bump> bumps;

  struct Jet {
    double value, t, x, xx, tt, tx;
  };

  Jet eval(double t, double x) const {
    Jet j{c0 + ct * t + cx * x + ctt * t * t + ctx * t * x + cxx * x * x,
          ct + 2.0 * ctt * t + ctx * x,
          cx + ctx * t + 2.0 * cxx * x,
          2.0 * cxx,
          2.0 * ctt,
          ctx};
    for (const auto& b : bumps) {
      const double u = (t - b.t0) / b.st;
      const double v = (x - b.x0) / b.sx;
      const double g = b.amp * std::exp(-0.5 * (u * u + v * v));
      j.value += g;
      j.t += -g * u / b.st;
      j.x += -g * v / b.sx;
      j.xx += g * (v * v - 1.0) / (b.sx * b.sx);
      j.tt += g * (u * u - 1.0) / (b.st * b.st);
      j.tx += g * u * v / (b.st * b.sx);
    }
    return j;
  }
};

struct SamplerConfig {
  std::size_t functions = 200;
  std::uint64_t seed = 12345;
  std::size_t bumps_per_function = 2;
  double tol_factor = 10.0;  ///< tol = factor (dx + dt)(1 + max|H_T|)
  // Bump widths as fractions of the time span / domain length, drawn uniformly.
  double min_width_t = 0.2, max_width_t = 0.6;
  double min_width_x = 0.1, max_width_x = 0.3;
  bool refine_extrema = false;  ///< evaluate off-lattice (see detail::refine_extremum)
};

/// One recorded space-time slice for the viscosity checker.
struct Frame {
  double t;
  Field S;
  Field t_dot_eps;
};

inline Frame make_frame(const State& s, const MaterialParams& p) {
  return {s.t, s.S, dot_with(s.elastic.T, p.misfit)};
}

struct ViscositySummary {
  std::size_t functions = 0;
  std::size_t max_points = 0;  ///< strict local maxima of S - phi tested
  std::size_t min_points = 0;  ///< strict local minima of S - phi tested
  std::size_t unconfirmed = 0;  ///< lattice extrema with no nearby smooth extremum (skipped)
  double max_violation = 0.0;
  double max_sub_violation = 0.0;
  double max_super_violation = 0.0;
  double max_abs_hamiltonian = 0.0;
  double tol = 0.0;
  bool passed() const { return max_violation <= tol; }
};

inline std::vector<TestFunction> draw_test_functions(const SamplerConfig& cfg, double t0, double t1,
                                                     double a, double d) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  const double L = d - a;
  const double T = std::max(t1 - t0, std::numeric_limits<double>::min());
  std::vector<TestFunction> out(cfg.functions);
  for (auto& f : out) {
    f.c0 = unit(rng);
    f.ct = unit(rng) / T;
    f.cx = unit(rng) / L;
    f.ctt = unit(rng) / (T * T);
    f.ctx = unit(rng) / (T * L);
    f.cxx = unit(rng) / (L * L);
    for (std::size_t k = 0; k < cfg.bumps_per_function; ++k) {
      TestFunction::Bump b;
      b.amp = unit(rng);
      b.t0 = t0 + T * frac(rng);
      b.x0 = a + L * frac(rng);
      b.st = T * (cfg.min_width_t + (cfg.max_width_t - cfg.min_width_t) * frac(rng));
      b.sx = L * (cfg.min_width_x + (cfg.max_width_x - cfg.min_width_x) * frac(rng));
      f.bumps.push_back(b);
    }
  }
  return out;
}

namespace detail {

/// Quadratic Lagrange basis on three (possibly uneven) nodes and its derivatives at y.
inline std::array<std::array<double, 3>, 3> lagrange3(double y0, double y1, double y2, double y) {
  const std::array<double, 3> n{y0, y1, y2};
  std::array<std::array<double, 3>, 3> out{};  // out[derivative order][node]
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    const double den = (n[a] - n[b]) * (n[a] - n[c]);
    out[0][a] = (y - n[b]) * (y - n[c]) / den;
    out[1][a] = (2.0 * y - n[b] - n[c]) / den;
    out[2][a] = 2.0 / den;
  }
  return out;
}

/// Biquadratic interpolation on the 3x3 lattice stencil centred at (k, i).
class LocalPatch {
 public:
  LocalPatch(const std::vector<Frame>& frames, std::size_t k, std::size_t i, const Grid1D& grid,
             double t, double x)
      : k_(k), i_(i),
        lt_(lagrange3(frames[k - 1].t, frames[k].t, frames[k + 1].t, t)),
        lx_(lagrange3(grid.x(i - 1), grid.x(i), grid.x(i + 1), x)) {}

  /// Derivative (dt, dx) of the interpolant of field(k', i').
  template <typename F>
  double interpolate(F&& field, int dt = 0, int dx = 0) const {
    double v = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        v += lt_[dt][a] * lx_[dx][b] * field(k_ - 1 + a, i_ - 1 + b);
    return v;
  }

 private:
  std::size_t k_, i_;
  std::array<std::array<double, 3>, 3> lt_, lx_;
};

/// Extremum of (interpolated S) - phi near the lattice extremum (k, i):
/// dense search of the stencil box, then Newton polishing. Returns nothing
/// unless Newton settles on an interior critical point whose Hessian has the
/// sign of the extremum (a lattice extremum without such a point is an
/// artefact of under-resolving phi).
inline std::optional<std::pair<double, double>> refine_extremum(const std::vector<Frame>& frames,
                                                                std::size_t k, std::size_t i,
                                                                const Grid1D& grid,
                                                                const TestFunction& phi,
                                                                bool is_max) {
  const double t_lo = frames[k - 1].t, t_hi = frames[k + 1].t;
  const double x_lo = grid.x(i - 1), x_hi = grid.x(i + 1);
  const double sign = is_max ? 1.0 : -1.0;
  auto S = [&](std::size_t a, std::size_t b) { return frames[a].S[b]; };
  auto g = [&](double t, double x) {
    return sign * (LocalPatch(frames, k, i, grid, t, x).interpolate(S) - phi.eval(t, x).value);
  };

  constexpr int m = 40;
  double t = frames[k].t, x = grid.x(i), best = g(t, x);
  for (int a = 0; a <= m; ++a) {
    const double ta = t_lo + (t_hi - t_lo) * a / m;
    for (int b = 0; b <= m; ++b) {
      const double xb = x_lo + (x_hi - x_lo) * b / m;
      const double v = g(ta, xb);
      if (v > best) best = v, t = ta, x = xb;
    }
  }

  for (int it = 0; it < 30; ++it) {
    const LocalPatch P(frames, k, i, grid, t, x);
    const auto j = phi.eval(t, x);
    const double gt = P.interpolate(S, 1, 0) - j.t;
    const double gx = P.interpolate(S, 0, 1) - j.x;
    const double htt = P.interpolate(S, 2, 0) - j.tt;
    const double hxx = P.interpolate(S, 0, 2) - j.xx;
    const double htx = P.interpolate(S, 1, 1) - j.tx;
    const double det = htt * hxx - htx * htx;
    if (!(det > 0.0) || sign * htt >= 0.0) return std::nullopt;
    const double st = (hxx * gt - htx * gx) / det;
    const double sx = (htt * gx - htx * gt) / det;
    t -= st;
    x -= sx;
    if (!(t > t_lo && t < t_hi && x > x_lo && x < x_hi)) return std::nullopt;
    if (std::abs(st) < 1e-10 * (t_hi - t_lo) && std::abs(sx) < 1e-10 * (x_hi - x_lo))
      return std::pair{t, x};
  }
  return std::nullopt;
}

}  // namespace detail

/// Sampled check of the viscosity inequalities. For every test function the
/// strict local extrema of S - phi over the 8-neighbourhood of interior
/// lattice nodes are located; at a maximum phi_t <= H_T(S, phi_x, phi_xx) + tol
/// is required, at a minimum phi_t >= H_T - tol. H_T uses the sharp
/// Hamiltonian with the run's own stress.
inline ViscositySummary viscosity_check(const std::vector<Frame>& frames, const MaterialParams& p,
                                        const Grid1D& grid, const SamplerConfig& cfg) {
  ViscositySummary out;
  const std::size_t nt = frames.size();
  const std::size_t nx = grid.size();
  if (nt < 3) return out;
  const double dx = grid.dx();

  double dt_max = 0.0;
  for (std::size_t k = 1; k < nt; ++k) dt_max = std::max(dt_max, frames[k].t - frames[k - 1].t);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& f = frames[k];
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double q = (f.S[i + 1] - f.S[i - 1]) / (2.0 * dx);
      const double r = (f.S[i + 1] - 2.0 * f.S[i] + f.S[i - 1]) / (dx * dx);
      out.max_abs_hamiltonian =
          std::max(out.max_abs_hamiltonian, std::abs(hamiltonian_sharp(f.t_dot_eps[i], f.S[i], q, r, p)));
    }
  }
  out.tol = cfg.tol_factor * (dx + dt_max) * (1.0 + out.max_abs_hamiltonian);

  const auto tests = draw_test_functions(cfg, frames.front().t, frames.back().t, grid.a(), grid.d());
  out.functions = tests.size();
  std::vector<Field> diff(nt, Field(nx));
  for (const auto& phi : tests) {
    for (std::size_t k = 0; k < nt; ++k)
      for (std::size_t i = 0; i < nx; ++i)
        diff[k][i] = frames[k].S[i] - phi.eval(frames[k].t, grid.x(i)).value;

    for (std::size_t k = 1; k + 1 < nt; ++k) {
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        const double c = diff[k][i];
        bool is_max = true, is_min = true;
        for (int dk = -1; dk <= 1 && (is_max || is_min); ++dk) {
          for (int di = -1; di <= 1; ++di) {
            if (dk == 0 && di == 0) continue;
            const double v = diff[k + dk][i + di];
            if (!(c > v)) is_max = false;
            if (!(c < v)) is_min = false;
          }
        }
        if (!is_max && !is_min) continue;
        double t_at = frames[k].t, x_at = grid.x(i);
        if (cfg.refine_extrema) {
          const auto r = detail::refine_extremum(frames, k, i, grid, phi, is_max);
          if (!r) {
            ++out.unconfirmed;
            continue;
          }
          std::tie(t_at, x_at) = *r;
        }
        const detail::LocalPatch patch(frames, k, i, grid, t_at, x_at);
        const double s_at = patch.interpolate([&](std::size_t a, std::size_t b) { return frames[a].S[b]; });
        const double tde_at =
            patch.interpolate([&](std::size_t a, std::size_t b) { return frames[a].t_dot_eps[b]; });
        const auto jet = phi.eval(t_at, x_at);
        const double h = hamiltonian_sharp(tde_at, s_at, jet.x, jet.xx, p);
        if (is_max) {
          ++out.max_points;
          out.max_sub_violation = std::max(out.max_sub_violation, jet.t - h);
        } else {
          ++out.min_points;
          out.max_super_violation = std::max(out.max_super_violation, h - jet.t);
        }
      }
    }
  }
  out.max_violation = std::max(out.max_sub_violation, out.max_super_violation);
  return out;
}

/// One row of the per-step diagnostics.
struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  double sup_abs_S = 0.0;
  double grad_norm_sq = 0.0;
  double dissipation_integral = 0.0;  ///< running sum of dt * sum |dS|_k (d2S)^2 dx
  double free_energy = 0.0;
  double dissipation_residual = 0.0;
  double work_rate = 0.0;
  double max_principle_excess = 0.0;  ///< positive part of the bound violation this step
};

struct MonitorResult {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double threshold = 0.0;
};

struct DiagnosticsReport {
  std::vector<StepRecord> records;
  std::vector<MonitorResult> monitors;
  bool all_passed() const {
    return std::all_of(monitors.begin(), monitors.end(), [](const auto& m) { return m.passed; });
  }
};

}  // namespace martensite
