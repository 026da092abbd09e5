#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "martensite/errors.hpp"

namespace martensite {

/// Uniform node-centred grid on [a, d] including both boundary nodes.
class Grid1D {
 public:
  Grid1D(double a, double d, std::size_t nodes) : a_(a), d_(d), n_(nodes) {
    if (!(a < d)) throw ConfigError("grid: need a < d");
    if (nodes < 3) throw ConfigError("grid: need at least 3 nodes");
    dx_ = (d - a) / static_cast<double>(nodes - 1);
  }

  double a() const { return a_; }
  double d() const { return d_; }
  double length() const { return d_ - a_; }
  std::size_t size() const { return n_; }
  double dx() const { return dx_; }

  /// Boundary nodes are returned exactly.
  double x(std::size_t i) const {
    if (i + 1 == n_) return d_;
    return a_ + static_cast<double>(i) * dx_;
  }

  std::vector<double> coordinates() const {
    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
    return xs;
  }

  /// Grid with the same interval and spacing divided by `factor`.
  Grid1D refined(std::size_t factor) const { return Grid1D(a_, d_, (n_ - 1) * factor + 1); }

 private:
  double a_, d_;
  std::size_t n_;
  double dx_;
};

using Field = std::vector<double>;

template <typename F>
Field sample(const Grid1D& g, F&& f) {
  Field out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.x(i));
  return out;
}

/// Composite trapezoid rule over all nodes.
inline double trapezoid(std::span<const double> f, double dx) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dx;
}

/// Running trapezoid integral from the first node; out[0] = 0.
inline Field cumulative_trapezoid(std::span<const double> f, double dx) {
  Field out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * dx * (f[i - 1] + f[i]);
  return out;
}

/// Second-order first derivative at every node: central in the interior,
/// three-point one-sided at the ends.
inline Field nodal_derivative(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  Field out(n);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
  return out;
}

/// Thomas algorithm for lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
/// lower[0] and upper[n-1] are ignored. Throws SingularSystem on a zero pivot.
inline Field solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                               std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  Field c(n), x(n);
  double piv = diag[0];
  if (piv == 0.0) throw SingularSystem("tridiagonal solve: zero pivot");
  c[0] = n > 1 ? upper[0] / piv : 0.0;
  x[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = diag[i] - lower[i] * c[i - 1];
    if (piv == 0.0) throw SingularSystem("tridiagonal solve: zero pivot");
    c[i] = i + 1 < n ? upper[i] / piv : 0.0;
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / piv;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

inline double max_abs(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace martensite
