#pragma once

// Free-boundary reference model in 1D: S is the indicator of one phase, the
// single interface z moves with the configurational-force law
//
//   V = c (-<T>.eps_bar [S] + [psi]) / [S],
//
// where [f] = f(z+) - f(z-) and <f> is the average of the one-sided traces.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "martensite/elasticity.hpp"
#include "martensite/errors.hpp"
#include "martensite/evolution.hpp"
#include "martensite/grid.hpp"
#include "martensite/material.hpp"

namespace martensite {

/// orientation = +1: S = 0 on (a,z), S = 1 on (z,d). orientation = -1: mirrored.
struct SharpState {
  double t = 0.0;
  double z = 0.0;
  int orientation = 1;

  double s_minus() const { return orientation > 0 ? 0.0 : 1.0; }
  double s_plus() const { return orientation > 0 ? 1.0 : 0.0; }
  double jump() const { return s_plus() - s_minus(); }
};

struct SharpElastic {
  ElasticSolution fields;
  SymMat3 T_minus, T_plus;  ///< one-sided traces at z
};

/// Nodal values of the indicator; a node sitting exactly on z gets 1/2.
inline Field sharp_profile(const SharpState& s, const Grid1D& grid) {
  Field S(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    S[i] = x > s.z ? s.s_plus() : (x < s.z ? s.s_minus() : 0.5);
  }
  return S;
}

/// Closed-form elastic fields for the indicator S with exact integrals.
inline SharpElastic sharp_elastic(const SharpState& s, std::span<const Vec3> b,
                                  const MaterialParams& params, const Grid1D& grid) {
  const std::size_t n = grid.size();
  const Field S = sharp_profile(s, grid);
  Field running(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    running[i] = s.orientation > 0 ? std::max(0.0, x - s.z) : std::min(x, s.z) - grid.a();
  }
  const Correction corr = solve_correction(b, grid, params.projection, params.D);
  SharpElastic out;
  out.fields = solve_elastic(S, corr, params, grid, 1.0, std::span<const double>(running));

  // Traces: the local term jumps with S, the nonlocal term is constant and
  // sigma is continuous (linear interpolation between the bracketing nodes).
  const double mean = running.back() / grid.length();
  const SymMat3 local = params.D.apply(params.projection.eps_star - params.misfit);
  const SymMat3 nonlocal = params.D.apply(params.projection.eps_star);
  const double pos = (s.z - grid.a()) / grid.dx();
  const std::size_t i0 = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), n - 2);
  const double w = pos - static_cast<double>(i0);
  const SymMat3 sigma = (1.0 - w) * corr.sigma[i0] + w * corr.sigma[i0 + 1];
  out.T_minus = s.s_minus() * local - mean * nonlocal + sigma;
  out.T_plus = s.s_plus() * local - mean * nonlocal + sigma;
  return out;
}

/// Eshelby driving term -<T>.eps_bar [S] + [psi].
inline double driving_force(const SharpState& s, const SharpElastic& e, const MaterialParams& p) {
  const SymMat3 avg = 0.5 * (e.T_minus + e.T_plus);
  const double psi_jump = p.well.value(s.s_plus()) - p.well.value(s.s_minus());
  return -dot(avg, p.misfit) * s.jump() + psi_jump;
}

/// Normal speed, positive in the direction in which S increases.
inline double interface_velocity(const SharpState& s, const SharpElastic& e,
                                 const MaterialParams& p) {
  return p.c * driving_force(s, e, p) / s.jump();
}

/// dz/dt: the normal points from the S- side to the S+ side iff [S] > 0.
inline double interface_rate(const SharpState& s, const Load& load, const MaterialParams& p,
                             const Grid1D& grid) {
  const double lo = grid.a() + grid.dx(), hi = grid.d() - grid.dx();
  if (!(s.z > lo && s.z < hi))
    throw InterfaceExit("interface left the domain at t = " + std::to_string(s.t));
  const VecField b = load.sample(grid, s.t);
  const double v = interface_velocity(s, sharp_elastic(s, b, p, grid), p);
  return s.jump() > 0 ? v : -v;
}

/// Classical RK4 step of z' = V(z, t).
inline SharpState advance_interface(const SharpState& s, double dt, const Load& load,
                                    const MaterialParams& p, const Grid1D& grid) {
  if (!(dt > 0.0)) throw ConfigError("advance_interface: dt must be positive");
  auto at = [&](double t, double z) {
    SharpState q = s;
    q.t = t;
    q.z = z;
    return q;
  };
  const double k1 = interface_rate(s, load, p, grid);
  const double k2 = interface_rate(at(s.t + 0.5 * dt, s.z + 0.5 * dt * k1), load, p, grid);
  const double k3 = interface_rate(at(s.t + 0.5 * dt, s.z + 0.5 * dt * k2), load, p, grid);
  const double k4 = interface_rate(at(s.t + dt, s.z + dt * k3), load, p, grid);
  SharpState next = at(s.t + dt, s.z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  const double lo = grid.a() + grid.dx(), hi = grid.d() - grid.dx();
  if (!(next.z > lo && next.z < hi))
    throw InterfaceExit("interface left the domain at t = " + std::to_string(next.t));
  return next;
}

struct SharpSample {
  double t, z, V, driving;
};

/// Integrates to t_end with fixed dt (the last step is shortened). Stops early,
/// keeping what was computed, if the interface exits.
struct SharpTrajectory {
  std::vector<SharpSample> samples;
  int orientation = 1;
  bool exited = false;
};

inline SharpTrajectory integrate_sharp(SharpState s, double t_end, double dt, const Load& load,
                                       const MaterialParams& p, const Grid1D& grid) {
  SharpTrajectory traj;
  traj.orientation = s.orientation;
  auto record = [&](const SharpState& q) {
    const SharpElastic e = sharp_elastic(q, load.sample(grid, q.t), p, grid);
    traj.samples.push_back({q.t, q.z, interface_velocity(q, e, p), driving_force(q, e, p)});
  };
  record(s);
  const double tol = 1e-12 * std::max(t_end, 1.0);
  try {
    while (s.t < t_end - tol) {
      s = advance_interface(s, std::min(dt, t_end - s.t), load, p, grid);
      if (std::abs(s.t - t_end) <= tol) s.t = t_end;
      record(s);
    }
  } catch (const InterfaceExit&) {
    traj.exited = true;
  }
  return traj;
}

/// Position at time t by cubic Hermite interpolation using dz/dt = +-V.
inline double sharp_position(const SharpTrajectory& traj, double t) {
  const auto& v = traj.samples;
  if (v.empty()) throw LevelSetLost("empty sharp trajectory");
  if (t <= v.front().t) return v.front().z;
  if (t >= v.back().t) return v.back().z;
  const auto it = std::upper_bound(v.begin(), v.end(), t,
                                   [](double x, const SharpSample& s) { return x < s.t; });
  const SharpSample& p1 = *it;
  const SharpSample& p0 = *(it - 1);
  const double h = p1.t - p0.t;
  const double u = (t - p0.t) / h;
  const double sgn = traj.orientation > 0 ? 1.0 : -1.0;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * p0.z + h10 * h * sgn * p0.V + h01 * p1.z + h11 * h * sgn * p1.V;
}

/// Diffuse initial profile centred at z0 with width 2 sqrt(nu) * ell,
/// ell = 1/sqrt(2 theta) (the travelling-wave shape of the symmetric well).
/// Boundary compatibility is left to prepare_initial.
inline Field tanh_profile(double z0, int orientation, const MaterialParams& p, const Grid1D& grid) {
  const double ell = 1.0 / std::sqrt(2.0 * p.well.theta());
  const double width = 2.0 * std::sqrt(p.nu) * ell;
  return sample(grid, [&](double x) {
    return 0.5 * (1.0 + std::tanh(orientation * (x - z0) / width));
  });
}

/// Position of the S = 1/2 level set: the first crossing met when walking from
/// the S = 0 end towards the other phase, by linear interpolation.
inline double level_set_position(std::span<const double> S, const Grid1D& grid, int orientation,
                                 double level = 0.5) {
  const std::size_t n = S.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t i = orientation > 0 ? k : n - 1 - k;
    const std::size_t j = orientation > 0 ? k + 1 : n - 2 - k;
    if (S[i] < level && S[j] >= level) {
      const double f = (level - S[i]) / (S[j] - S[i]);
      return grid.x(i) + f * (grid.x(j) - grid.x(i));
    }
  }
  throw LevelSetLost("no level-set crossing in frame");
}

struct PositionError {
  double t, z_diffuse, z_sharp, error;
};

inline std::vector<PositionError> compare_diffuse_sharp(const std::vector<State>& diffuse,
                                                        const Grid1D& grid,
                                                        const SharpTrajectory& sharp) {
  std::vector<PositionError> out;
  out.reserve(diffuse.size());
  for (const auto& f : diffuse) {
    const double zd = level_set_position(f.S, grid, sharp.orientation);
    const double zs = sharp_position(sharp, f.t);
    out.push_back({f.t, zd, zs, std::abs(zd - zs)});
  }
  return out;
}

}  // namespace martensite
