#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "martensite/config.hpp"
#include "martensite/grid.hpp"
#include "martensite/sharp_interface.hpp"

namespace martensite {

/// C-infinity bump of unit height supported on (center - halfwidth, center + halfwidth).
inline double smooth_bump(double x, double center, double halfwidth) {
  const double r = (x - center) / halfwidth;
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

/// Initial order parameter for a scenario (before prepare_initial).
inline Field make_initial(const Scenario& s, const Grid1D& grid) {
  const auto& in = s.initial;
  if (in.kind == "zero") return Field(grid.size(), 0.0);
  if (in.kind == "tanh") {
    Field S = tanh_profile(in.interface, in.orientation, s.params, grid);
    S.front() = 0.0;
    S.back() = 0.0;
    return S;
  }
  Field S = sample(grid, [&](double x) { return in.amplitude * smooth_bump(x, in.center, in.halfwidth); });
  S.front() = 0.0;
  S.back() = 0.0;
  return S;
}

/// Random compatible data: a sum of three smooth bumps with amplitudes in
/// [-0.6, 1.4], centres in the middle 60% of the domain and half-widths
/// between 5% and 20% of its length.
inline Field random_initial(std::uint64_t seed, const Grid1D& grid) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double L = grid.length();
  Field S(grid.size(), 0.0);
  for (int k = 0; k < 3; ++k) {
    const double amp = -0.6 + 2.0 * u(rng);
    const double c = grid.a() + L * (0.2 + 0.6 * u(rng));
    const double w = L * (0.05 + 0.15 * u(rng));
    for (std::size_t i = 0; i < grid.size(); ++i) S[i] += amp * smooth_bump(grid.x(i), c, w);
  }
  S.front() = 0.0;
  S.back() = 0.0;
  return S;
}

}  // namespace martensite
