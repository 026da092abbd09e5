#pragma once

// Time integration of the kappa-regularized order-parameter equation
//
//   S_t = c nu |S_x|_k S_xx + c (T.eps_bar - psi'(S)) (|S_x|_k - k)
//
// coupled to the quasi-static elastic solve.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "martensite/elasticity.hpp"
#include "martensite/errors.hpp"
#include "martensite/grid.hpp"
#include "martensite/material.hpp"

namespace martensite {

/// Body force b(t, x).
struct Load {
  std::function<Vec3(double, double)> f;
  bool zero = true;

  static Load none() {
    return {[](double, double) { return Vec3::Zero().eval(); }, true};
  }
  static Load from(std::function<Vec3(double, double)> fn) { return {std::move(fn), false}; }

  VecField sample(const Grid1D& g, double t) const {
    VecField out(g.size(), Vec3::Zero());
    if (zero) return out;
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(t, g.x(i));
    return out;
  }
};

/// Standard bump exp(-1/(1-r^2)) on the unit disc in (t, x), scaled to width
/// kappa and normalized to unit integral.
class Mollifier {
 public:
  explicit Mollifier(double width) : width_(width) {
    if (!(width > 0.0)) throw ConfigError("mollifier: width must be positive");
  }

  double width() const { return width_; }

  /// chi_kappa(t, x) = kappa^{-2} chi(t/kappa, x/kappa).
  double operator()(double t, double x) const {
    const double r2 = (t * t + x * x) / (width_ * width_);
    if (r2 >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r2)) / (unit_mass() * width_ * width_);
  }

  /// Integral of the unnormalized bump over the unit disc.
  static double unit_mass() {
    static const double mass = [] {
      // 2 pi int_0^1 r exp(-1/(1-r^2)) dr by composite Simpson; the integrand is flat at r = 1.
      constexpr int n = 20000;
      const double h = 1.0 / n;
      auto f = [](double r) { return r < 1.0 ? r * std::exp(-1.0 / (1.0 - r * r)) : 0.0; };
      double s = f(0.0) + f(1.0);
      for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
      return 2.0 * M_PI * s * h / 3.0;
    }();
    return mass;
  }

  /// Quadrature weights chi_kappa(j ht, k hx) ht hx on the stencil |j ht|, |k hx| <= kappa,
  /// indexed [j + J][k + K]. Returns the raw weights; their sum approximates 1.
  std::vector<std::vector<double>> raw_weights(double ht, double hx) const {
    const int J = static_cast<int>(std::floor(width_ / ht));
    const int K = static_cast<int>(std::floor(width_ / hx));
    std::vector<std::vector<double>> w(2 * J + 1, std::vector<double>(2 * K + 1));
    for (int j = -J; j <= J; ++j)
      for (int k = -K; k <= K; ++k) w[j + J][k + K] = (*this)(j * ht, k * hx) * ht * hx;
    return w;
  }

  /// Raw weights rescaled to sum exactly to one. A kernel narrower than the
  /// sample spacing degenerates to the identity.
  std::vector<std::vector<double>> weights(double ht, double hx) const {
    auto w = raw_weights(ht, hx);
    double sum = 0.0;
    for (const auto& row : w)
      for (double v : row) sum += v;
    if (!(sum > 0.0)) {
      for (auto& row : w) std::fill(row.begin(), row.end(), 0.0);
      w[w.size() / 2][w.front().size() / 2] = 1.0;
      return w;
    }
    for (auto& row : w)
      for (double& v : row) v /= sum;
    return w;
  }

 private:
  double width_;
};

/// Space-time samples of the body force: samples[k][i] = b(t0 + k ht, x_i).
struct LoadSamples {
  double t0 = 0.0;
  double ht = 1.0;
  std::vector<VecField> samples;

  /// Linear interpolation in time, constant continuation outside the sampled window.
  VecField at(double t) const {
    if (samples.size() == 1) return samples.front();
    const double s = std::clamp((t - t0) / ht, 0.0, static_cast<double>(samples.size() - 1));
    const std::size_t k = std::min(static_cast<std::size_t>(s), samples.size() - 2);
    const double w = s - static_cast<double>(k);
    VecField out(samples[k].size());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (1.0 - w) * samples[k][i] + w * samples[k + 1][i];
    return out;
  }
};

/// Discrete convolution of space-time samples with chi_kappa. Outside the
/// sampled window the data is continued by its nearest value.
inline LoadSamples mollify(const LoadSamples& b, double kappa, const Grid1D& grid) {
  const Mollifier chi(kappa);
  const auto w = chi.weights(b.ht, grid.dx());
  const int J = static_cast<int>(w.size() / 2);
  const int K = static_cast<int>(w.front().size() / 2);
  const int nt = static_cast<int>(b.samples.size());
  const int nx = static_cast<int>(grid.size());

  LoadSamples out{b.t0, b.ht, std::vector<VecField>(nt, VecField(nx, Vec3::Zero()))};
  for (int k = 0; k < nt; ++k) {
    for (int i = 0; i < nx; ++i) {
      Vec3 acc = Vec3::Zero();
      for (int j = -J; j <= J; ++j) {
        const int kk = std::clamp(k - j, 0, nt - 1);
        for (int l = -K; l <= K; ++l) {
          const int ii = std::clamp(i - l, 0, nx - 1);
          acc += w[j + J][l + K] * b.samples[kk][ii];
        }
      }
      out.samples[k][i] = acc;
    }
  }
  return out;
}

/// Samples a load on [0, t_end] with time spacing ht.
inline LoadSamples sample_load(const Load& load, const Grid1D& grid, double t_end, double ht) {
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / ht - 1e-12));
  LoadSamples s{0.0, ht, {}};
  s.samples.reserve(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) s.samples.push_back(load.sample(grid, k * ht));
  return s;
}

/// C-infinity transition from 0 (s <= 0) to 1 (s >= 1).
inline double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double f0 = std::exp(-1.0 / s);
  const double f1 = std::exp(-1.0 / (1.0 - s));
  return f0 / (f0 + f1);
}

/// Boundary-compatible initial data: S0 times a smooth cutoff that vanishes on
/// the two nodes next to each boundary and equals one beyond a kappa-neighbourhood.
/// The result and its first and second differences vanish at x = a and x = d.
inline Field prepare_initial(std::span<const double> S0, double kappa, const Grid1D& grid) {
  const std::size_t n = grid.size();
  const double scale = std::max(1.0, max_abs(S0));
  if (std::abs(S0.front()) > 1e-12 * scale || std::abs(S0.back()) > 1e-12 * scale)
    throw IncompatibleData("initial data must vanish at both boundary nodes");
  const double pad = 2.0 * grid.dx();
  Field out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = std::min(grid.x(i) - grid.a(), grid.d() - grid.x(i));
    out[i] = S0[i] * smooth_step((dist - pad) / kappa);
  }
  out.front() = 0.0;
  out.back() = 0.0;
  return out;
}

struct State {
  double t = 0.0;
  Field S;
  ElasticSolution elastic;
};

enum class StepMode { Explicit, SemiImplicit };

struct RunConfig {
  double t_end = 0.5;
  double cfl_safety = 0.5;
  double dt = 0.0;  ///< fixed step; 0 selects adaptive (explicit) or 2.5e-3 (semi-implicit)
  std::size_t output_stride = 1;
  StepMode mode = StepMode::SemiImplicit;
  bool fixed_point = false;
  double fixed_point_tol = 1e-10;
  int fixed_point_max_iter = 50;
  bool mollify = false;

  void validate() const {
    if (!(t_end > 0.0)) throw ConfigError("run: t_end must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("run: cfl must lie in (0,1]");
    if (dt < 0.0) throw ConfigError("run: dt must be non-negative");
    if (output_stride == 0) throw ConfigError("run: output stride must be at least 1");
    if (!(fixed_point_tol > 0.0)) throw ConfigError("run: fixed-point tolerance must be positive");
  }
};

/// Regularized right-hand side at interior nodes with central differences;
/// zero at the boundary nodes.
inline Field rhs_regularized(std::span<const double> S, const TensorField& T,
                             const MaterialParams& p, const Grid1D& grid) {
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  Field out(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double q = (S[i + 1] - S[i - 1]) / (2.0 * dx);
    const double r = (S[i + 1] - 2.0 * S[i] + S[i - 1]) / (dx * dx);
    out[i] = hamiltonian_regularized(dot(T[i], p.misfit), S[i], q, r, p);
  }
  return out;
}

/// Per-node linearization used by both time-stepping modes. The reaction
/// c R (|q|_k - k) equals v q with v = c R q / (|q|_k + k), so it is handled
/// as transport with speed v. Central differencing is kept while the cell
/// Peclet condition |v| dx <= 2 c nu |q|_k holds; beyond it the transport
/// term is upwinded, which keeps the update monotone.
struct NodeCoefficients {
  double diffusion = 0.0;  ///< c nu |q|_k / dx^2
  double velocity = 0.0;
  bool upwind = false;
};

inline std::vector<NodeCoefficients> node_coefficients(std::span<const double> S,
                                                       std::span<const double> t_dot_eps,
                                                       const MaterialParams& p,
                                                       const Grid1D& grid) {
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  std::vector<NodeCoefficients> out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double q = (S[i + 1] - S[i - 1]) / (2.0 * dx);
    const double qk = abs_kappa(q, p.kappa);
    const double drive = t_dot_eps[i] - p.well.derivative(S[i]);
    NodeCoefficients& c = out[i];
    c.diffusion = p.c * p.nu * qk / (dx * dx);
    c.velocity = p.c * drive * q / (qk + p.kappa);
    c.upwind = std::abs(c.velocity) * dx > 2.0 * p.c * p.nu * qk;
  }
  return out;
}

/// Largest explicit step for which the update is a convex combination.
inline double explicit_stability_limit(const std::vector<NodeCoefficients>& coeff, double dx) {
  double rate = 0.0;
  for (const auto& c : coeff)
    rate = std::max(rate, 2.0 * c.diffusion + (c.upwind ? std::abs(c.velocity) / dx : 0.0));
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

inline double explicit_stability_limit(const State& s, const MaterialParams& p,
                                       const Grid1D& grid) {
  return explicit_stability_limit(node_coefficients(s.S, dot_with(s.elastic.T, p.misfit), p, grid),
                                  grid.dx());
}

/// One parabolic update of S from `S_old` using coefficients evaluated at
/// `S_coef` with stress product `t_dot_eps`. Boundary values are held at zero.
inline Field parabolic_update(std::span<const double> S_old, std::span<const double> S_coef,
                              std::span<const double> t_dot_eps, const TensorField& T_coef,
                              double dt, StepMode mode, const MaterialParams& p,
                              const Grid1D& grid) {
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  const auto coeff = node_coefficients(S_coef, t_dot_eps, p, grid);

  if (mode == StepMode::Explicit) {
    const double limit = explicit_stability_limit(coeff, dx);
    if (dt > limit * (1.0 + 1e-12))
      throw CflViolation("explicit step: dt = " + std::to_string(dt) +
                         " exceeds the stability limit " + std::to_string(limit));
    const Field central = rhs_regularized(S_old, T_coef, p, grid);
    Field out(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const auto& c = coeff[i];
      double rate = central[i];
      if (c.upwind) {
        const double diff = c.diffusion * (S_old[i + 1] - 2.0 * S_old[i] + S_old[i - 1]);
        const double grad = c.velocity > 0.0 ? (S_old[i + 1] - S_old[i]) / dx
                                              : (S_old[i] - S_old[i - 1]) / dx;
        rate = diff + c.velocity * grad;
      }
      out[i] = S_old[i] + dt * rate;
    }
    return out;
  }

  Field lower(n, 0.0), diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto& c = coeff[i];
    const double a = dt * c.diffusion;
    const double b = dt * c.velocity / dx;
    if (!c.upwind) {
      lower[i] = -(a - 0.5 * b);
      upper[i] = -(a + 0.5 * b);
      diag[i] = 1.0 + 2.0 * a;
    } else if (b > 0.0) {
      lower[i] = -a;
      upper[i] = -(a + b);
      diag[i] = 1.0 + 2.0 * a + b;
    } else {
      lower[i] = -(a - b);
      upper[i] = -a;
      diag[i] = 1.0 + 2.0 * a - b;
    }
    rhs[i] = S_old[i];
  }
  Field out = solve_tridiagonal(lower, diag, upper, rhs);
  out.front() = 0.0;
  out.back() = 0.0;
  return out;
}

/// Advances one step: parabolic update with the current stress, then a fresh
/// elastic solve with the load `b_next` sampled at the new time level.
inline State step(const State& s, double dt, const MaterialParams& p, const Grid1D& grid,
                  StepMode mode, const VecField& b_next) {
  const Field tde = dot_with(s.elastic.T, p.misfit);
  State next;
  next.t = s.t + dt;
  next.S = parabolic_update(s.S, s.S, tde, s.elastic.T, dt, mode, p, grid);
  next.elastic = elastic_state(next.S, b_next, p, grid);
  return next;
}

inline State step(const State& s, double dt, const MaterialParams& p, const Grid1D& grid,
                  StepMode mode, const Load& load = Load::none()) {
  return step(s, dt, p, grid, mode, load.sample(grid, s.t + dt));
}

struct FixedPointResult {
  State state;
  int iterations = 0;
};

namespace detail {

inline FixedPointResult fixed_point_iterate(const State& s, Field guess, double dt, double tol,
                                            int max_iter, double lambda, const MaterialParams& p,
                                            const Grid1D& grid, const VecField& b_next) {
  VecField b_hat = b_next;
  for (auto& v : b_hat) v *= lambda;
  const Correction corr = solve_correction(b_hat, grid, p.projection, p.D);
  for (int it = 1; it <= max_iter; ++it) {
    ElasticSolution el = solve_elastic(guess, corr, p, grid, lambda);
    const Field tde = dot_with(el.T, p.misfit);
    Field next = parabolic_update(s.S, guess, tde, el.T, dt, StepMode::SemiImplicit, p, grid);
    const double change = max_abs_diff(next, guess);
    guess = std::move(next);
    if (change < tol) {
      State out;
      out.t = s.t + dt;
      out.S = std::move(guess);
      out.elastic = solve_elastic(out.S, corr, p, grid, lambda);
      return {std::move(out), it};
    }
  }
  throw NoConvergence("fixed-point step: no convergence after " + std::to_string(max_iter) +
                      " iterations; reduce dt");
}

}  // namespace detail

/// Inner iteration: (i) elastic solve from the current iterate, (ii) one
/// semi-implicit parabolic step from the old state with coefficients and
/// stress taken at the iterate. Repeats until successive iterates differ by
/// less than `tol` in the max norm. If the plain iteration stalls, the
/// problem with half the elastic coupling and load is solved first and its
/// fixed point used as the starting iterate.
inline FixedPointResult fixed_point_step(const State& s, double dt, double tol,
                                         const MaterialParams& p, const Grid1D& grid,
                                         const VecField& b_next, int max_iter = 50) {
  if (!(tol > 0.0)) throw ConfigError("fixed-point step: tolerance must be positive");
  try {
    return detail::fixed_point_iterate(s, s.S, dt, tol, max_iter, 1.0, p, grid, b_next);
  } catch (const NoConvergence&) {
    const auto half =
        detail::fixed_point_iterate(s, s.S, dt, tol, max_iter, 0.5, p, grid, b_next);
    auto full =
        detail::fixed_point_iterate(s, half.state.S, dt, tol, max_iter, 1.0, p, grid, b_next);
    full.iterations += half.iterations;
    return full;
  }
}

inline FixedPointResult fixed_point_step(const State& s, double dt, double tol,
                                         const MaterialParams& p, const Grid1D& grid,
                                         const Load& load = Load::none(), int max_iter = 50) {
  return fixed_point_step(s, dt, tol, p, grid, load.sample(grid, s.t + dt), max_iter);
}

}  // namespace martensite
