#pragma once

// Randomized property suites shared by the unit tests and the acceptance binary.
// Each suite reports how many of its cases failed and the first failure.

#include <cmath>
#include <array>
#include <cstdint>
#include <random>
#include <string>

#include "martensite/elasticity.hpp"
#include "martensite/grid.hpp"
#include "martensite/material.hpp"
#include "martensite/tensor.hpp"

namespace suites {

using namespace martensite;

inline ElasticityTensor random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat6 B;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) B(i, j) = u(rng);
  return ElasticityTensor(B * B.transpose() + 0.5 * Mat6::Identity());
}

inline SymMat3 random_sym(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

inline double energy(const ElasticityTensor& D, const SymMat3& e) { return dot(D.apply(e), e); }

struct Outcome {
  std::size_t cases = 0, failures = 0;
  std::string first_failure;
  bool passed() const { return failures == 0; }
  void fail(const std::string& why) {
    if (failures++ == 0) first_failure = why;
  }
};

/// Idempotence, D-orthogonality of the residual, and minimality of eps*.
inline Outcome projection_suite(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Outcome out;
  for (std::size_t k = 0; k < cases; ++k, ++out.cases) {
    const ElasticityTensor D = random_spd(rng);
    const SymMat3 e = random_sym(rng);
    const SymMat3 star = build_projection(D, e).eps_star;
    const double scale = std::max(1.0, D.mandel().cwiseAbs().maxCoeff()) * std::max(1.0, e.max_abs());

    const SymMat3 again = build_projection(D, star).eps_star;
    if ((again - star).max_abs() > 1e-12 * scale) out.fail("idempotence, case " + std::to_string(k));

    const SymMat3 residual = e - star;
    for (int j = 0; j < 3; ++j)
      if (std::abs(dot(D.apply(residual), strain_of_gradient(Vec3::Unit(j)))) > 1e-12 * scale)
        out.fail("orthogonality, case " + std::to_string(k));

    const double best = energy(D, residual);
    for (int trial = 0; trial < 5; ++trial) {
      const Vec3 v(u(rng), u(rng), u(rng));
      if (energy(D, e - strain_of_gradient(v)) < best - 1e-12 * scale)
        out.fail("minimization, case " + std::to_string(k));
    }
  }
  return out;
}

/// psi' > 0 on (0, S_hat) and (1, inf); psi' < 0 on (S_hat, 1) and (-inf, 0).
inline Outcome double_well_suite(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Outcome out;
  for (std::size_t k = 0; k < cases; ++k, ++out.cases) {
    const double theta = 0.1 + 10.0 * u(rng);
    const double tilt = (2.0 * u(rng) - 1.0) * 0.999 * theta / 3.0;
    const DoubleWell w(theta, tilt);
    const double s_hat = w.barrier();
    // Stay a relative margin away from the zeros so the sign is well defined.
    const double s = -2.0 + 5.0 * u(rng);
    const double margin = 1e-6;
    const double d = w.derivative(s);
    const bool near_zero = std::abs(s) < margin || std::abs(s - 1.0) < margin || std::abs(s - s_hat) < margin;
    if (near_zero) continue;
    const bool positive = (s > 0.0 && s < s_hat) || s > 1.0;
    if ((positive && !(d > 0.0)) || (!positive && !(d < 0.0)))
      out.fail("sign, case " + std::to_string(k) + " S = " + std::to_string(s));
    if (w.derivative(0.0) != 0.0 || w.derivative(1.0) != 0.0) out.fail("critical points, case " + std::to_string(k));
    if (std::abs(w.jump() - tilt) > 1e-14 * std::max(1.0, theta)) out.fail("jump, case " + std::to_string(k));
  }
  return out;
}

/// |H_kappa - H_sharp| <= c kappa (nu |r| + |T.eps_bar - psi'(p)|), and the
/// gap closes as kappa -> 0.
inline Outcome hamiltonian_suite(std::size_t cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Outcome out;
  for (std::size_t k = 0; k < cases; ++k, ++out.cases) {
    MaterialParams p;
    p.c = 0.1 + 5.0 * u(rng);
    p.nu = std::pow(10.0, -4.0 + 3.0 * u(rng));
    p.kappa = std::pow(10.0, -4.0 + 3.9 * u(rng));
    p.well = DoubleWell(1.0 + u(rng), 0.3 * (2.0 * u(rng) - 1.0));
    const double tde = 2.0 * u(rng) - 1.0;
    const double pv = -0.5 + 2.0 * u(rng);
    const double q = std::pow(10.0, -4.0 + 6.0 * u(rng)) * (u(rng) < 0.5 ? -1.0 : 1.0);
    const double r = 200.0 * (2.0 * u(rng) - 1.0);

    const double reaction = tde - p.well.derivative(pv);
    const double hk = hamiltonian_regularized(tde, pv, q, r, p);
    const double hs = hamiltonian_sharp(tde, pv, q, r, p);
    const double bound = p.c * p.kappa * (p.nu * std::abs(r) + std::abs(reaction));
    const double slack = 1e-13 * (std::abs(hk) + std::abs(hs) + bound + 1e-300);
    if (std::abs(hk - hs) > bound + slack) out.fail("bound, case " + std::to_string(k));

    MaterialParams small = p;
    small.kappa = p.kappa * 1e-3;
    const double gap_small = std::abs(hamiltonian_regularized(tde, pv, q, r, small) - hs);
    if (gap_small > 1e-3 * bound + slack) out.fail("limit, case " + std::to_string(k));
  }
  return out;
}

/// A few random low-frequency modes plus a random offset; not boundary compatible.
inline Field random_smooth_field(std::mt19937_64& rng, const Grid1D& grid) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double amp[4], ph[4];
  for (int m = 0; m < 4; ++m) amp[m] = u(rng) / (m + 1), ph[m] = 3.0 * u(rng);
  const double offset = 0.5 + 0.5 * u(rng);
  return sample(grid, [&](double x) {
    const double y = (x - grid.a()) / grid.length();
    double v = offset;
    for (int m = 0; m < 4; ++m) v += amp[m] * std::sin((m + 1) * M_PI * y + ph[m]);
    return v;
  });
}

inline VecField random_smooth_load(std::mt19937_64& rng, const Grid1D& grid) {
  std::array<Field, 3> c;
  for (auto& f : c) f = random_smooth_field(rng, grid);
  VecField b(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) b[i] = Vec3(c[0][i], c[1][i], c[2][i]);
  return b;
}

inline double max_abs_diff(const TensorField& a, const TensorField& b, std::size_t stride_a = 1,
                           std::size_t stride_b = 1) {
  double m = 0.0;
  for (std::size_t i = 0; i * stride_a < a.size(); ++i) m = std::max(m, (a[i * stride_a] - b[i * stride_b]).max_abs());
  return m;
}

inline double max_abs(const TensorField& a) {
  double m = 0.0;
  for (const auto& t : a) m = std::max(m, t.max_abs());
  return m;
}

/// Largest relative difference in T between the closed form and the direct
/// discretization over random smooth S and loads on a random material.
inline double elastic_equivalence(std::size_t cases, std::uint64_t seed, std::size_t nodes) {
  std::mt19937_64 rng(seed);
  const Grid1D grid(0.0, 1.0, nodes);
  double worst = 0.0;
  for (std::size_t k = 0; k < cases; ++k) {
    const auto D = random_spd(rng);
    const SymMat3 misfit = random_sym(rng, 0.2);
    const auto p = MaterialParams::make(1.0, 1e-3, 0.1, misfit, D, DoubleWell());
    const Field S = random_smooth_field(rng, grid);
    const VecField b = random_smooth_load(rng, grid);
    const auto closed = elastic_state(S, b, p, grid);
    const auto oracle = fd_elastic_oracle(S, b, p, grid);
    worst = std::max(worst, max_abs_diff(closed.T, oracle.T) / std::max(max_abs(closed.T), 1e-300));
  }
  return worst;
}

/// Observed order of T from three nested grids (N, 2N-1, 4N-3) for one smooth case.
inline double elastic_order(std::uint64_t seed, std::size_t nodes) {
  std::mt19937_64 pick(seed);
  const auto D = random_spd(pick);
  const auto p = MaterialParams::make(1.0, 1e-3, 0.1, random_sym(pick, 0.2), D, DoubleWell());
  std::vector<TensorField> T;
  for (std::size_t f : {1, 2, 4}) {
    const Grid1D g(0.0, 1.0, (nodes - 1) * f + 1);
    std::mt19937_64 rng(seed + 1);  // same functions on every grid
    const Field S = random_smooth_field(rng, g);
    const VecField b = random_smooth_load(rng, g);
    T.push_back(elastic_state(S, b, p, g).T);
  }
  const double e1 = max_abs_diff(T[0], T[1], 1, 2);
  const double e2 = max_abs_diff(T[1], T[2], 2, 4);
  return std::log2(e1 / e2);
}

}  // namespace suites
