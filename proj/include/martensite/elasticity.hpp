#pragma once

// Quasi-static elastic subsystem in one space dimension,
//
//   -(T^1)_x = b,   T = D(eps(u_x) - eps_bar S),   u(a) = u(d) = 0,
//
// solved two ways: through the closed-form nonlocal representation built on
// the projection data, and by a direct block-tridiagonal discretization that
// never touches the projection (used as an oracle).

#include <optional>
#include <span>
#include <vector>

#include "martensite/grid.hpp"
#include "martensite/material.hpp"
#include "martensite/tensor.hpp"

namespace martensite {

using VecField = std::vector<Vec3>;
using TensorField = std::vector<SymMat3>;

struct ElasticSolution {
  VecField u;
  TensorField T;
};

struct Correction {
  VecField w;
  TensorField sigma;
};

inline Field dot_with(const TensorField& T, const SymMat3& m) {
  Field out(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) out[i] = dot(T[i], m);
  return out;
}

/// Solves A w_xx = -b_hat with w(a) = w(d) = 0 by central differences and
/// returns (w, sigma = D eps(w_x)). Multiplying by A^{-1} decouples the three
/// components into scalar tridiagonal problems.
inline Correction solve_correction(std::span<const Vec3> b_hat, const Grid1D& grid,
                                   const ProjectionData& proj, const ElasticityTensor& D) {
  const std::size_t n = grid.size();
  Correction out{VecField(n, Vec3::Zero()), TensorField(n)};
  bool zero_load = true;
  for (const auto& b : b_hat) zero_load = zero_load && b.isZero(0.0);
  if (zero_load) return out;

  if (proj.correction_llt.info() != Eigen::Success)
    throw SingularSystem("correction problem: A is not positive definite");

  const double h2 = grid.dx() * grid.dx();
  const std::size_t m = n - 2;
  Field lower(m, 1.0), diag(m, -2.0), upper(m, 1.0), rhs(m);
  VecField scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = proj.solve(b_hat[i]);

  std::array<Field, 3> comp;
  for (int k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < m; ++i) rhs[i] = -h2 * scaled[i + 1](k);
    const Field interior = solve_tridiagonal(lower, diag, upper, rhs);
    comp[k].assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) comp[k][i + 1] = interior[i];
  }
  std::array<Field, 3> dcomp;
  for (int k = 0; k < 3; ++k) dcomp[k] = nodal_derivative(comp[k], grid.dx());

  for (std::size_t i = 0; i < n; ++i) {
    out.w[i] = Vec3(comp[0][i], comp[1][i], comp[2][i]);
    out.sigma[i] = D.apply(strain_of_gradient(Vec3(dcomp[0][i], dcomp[1][i], dcomp[2][i])));
  }
  return out;
}

/// Closed-form displacement and stress for a given order parameter:
///
///   u(x) = lambda u* (int_a^x S - (x-a)/(d-a) int_a^d S) + w(x)
///   T(x) = lambda D(eps* - eps_bar) S(x) - lambda D eps* / (d-a) int_a^d S + sigma(x)
///
/// Integrals use the composite trapezoid rule unless `running_integral`
/// supplies exact values of int_a^{x_i} S at the nodes.
inline ElasticSolution solve_elastic(std::span<const double> S, const Correction& correction,
                                     const MaterialParams& params, const Grid1D& grid,
                                     double lambda = 1.0,
                                     std::optional<std::span<const double>> running_integral = {}) {
  const std::size_t n = grid.size();
  const ProjectionData& proj = params.projection;
  const Field integral = running_integral ? Field(running_integral->begin(), running_integral->end())
                                          : cumulative_trapezoid(S, grid.dx());
  const double total = integral.back();
  const double mean = total / grid.length();

  const SymMat3 local = params.D.apply(proj.eps_star - params.misfit);
  const SymMat3 nonlocal = params.D.apply(proj.eps_star);

  ElasticSolution sol{VecField(n), TensorField(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = (grid.x(i) - grid.a()) / grid.length();
    sol.u[i] = lambda * (integral[i] - frac * total) * proj.u_star + correction.w[i];
    sol.T[i] = (lambda * S[i]) * local - (lambda * mean) * nonlocal + correction.sigma[i];
  }
  sol.u.front().setZero();
  sol.u.back().setZero();
  return sol;
}

/// Convenience: correction solve with load lambda*b followed by the closed form.
inline ElasticSolution elastic_state(std::span<const double> S, std::span<const Vec3> b,
                                     const MaterialParams& params, const Grid1D& grid,
                                     double lambda = 1.0) {
  VecField b_hat(b.begin(), b.end());
  if (lambda != 1.0)
    for (auto& v : b_hat) v *= lambda;
  return solve_elastic(S, solve_correction(b_hat, grid, params.projection, params.D), params,
                       grid, lambda);
}

/// Direct discretization of -(D(eps(u_x) - eps_bar S))^1_x = b_hat in the
/// nodal displacements. Cell fluxes
///
///   F_{i+1/2} = A (u_{i+1} - u_i)/dx - g s_{i+1/2},   g = (D eps_bar)^1,
///
/// with s_{i+1/2} the cell mean of S (nodal average unless `cell_means` is
/// given). Nodal strain is recovered from the flux through A u_x = T^1 + g S
/// and T from the constitutive law.
inline ElasticSolution fd_elastic_oracle(std::span<const double> S, std::span<const Vec3> b_hat,
                                         const MaterialParams& params, const Grid1D& grid,
                                         std::optional<std::span<const double>> cell_means = {}) {
  const std::size_t n = grid.size();
  const double dx = grid.dx();
  const ElasticityTensor& D = params.D;

  Mat3 A;
  for (int l = 0; l < 3; ++l) A.col(l) = D.apply(strain_of_gradient(Vec3::Unit(l))).first_column();
  Eigen::LLT<Mat3> a_llt(A);
  if (a_llt.info() != Eigen::Success) throw SingularSystem("fd oracle: A is not positive definite");
  const Vec3 g = D.apply(params.misfit).first_column();

  Field s_cell(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    s_cell[i] = cell_means ? (*cell_means)[i] : 0.5 * (S[i] + S[i + 1]);

  // Block tridiagonal system over interior nodes: A(-u_{i-1} + 2u_i - u_{i+1}) = r_i.
  const std::size_t m = n - 2;
  VecField r(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    r[k] = dx * dx * b_hat[i] - dx * (s_cell[i] - s_cell[i - 1]) * g;
  }
  std::vector<Mat3> c_prime(m);
  VecField d_prime(m);
  const Mat3 upper = -A;
  Mat3 pivot = 2.0 * A;
  for (std::size_t k = 0; k < m; ++k) {
    Vec3 rhs = r[k];
    if (k > 0) {
      pivot = 2.0 * A + A * c_prime[k - 1];
      rhs += A * d_prime[k - 1];
    }
    Eigen::PartialPivLU<Mat3> lu(pivot);
    if (!(std::abs(pivot.determinant()) > 0.0))
      throw SingularSystem("fd oracle: singular pivot block");
    c_prime[k] = lu.solve(upper);
    d_prime[k] = lu.solve(rhs);
  }
  VecField u(n, Vec3::Zero());
  for (std::size_t k = m; k-- > 0;) {
    u[k + 1] = d_prime[k];
    if (k + 1 < m) u[k + 1] -= c_prime[k] * u[k + 2];
  }

  VecField flux(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) flux[i] = A * (u[i + 1] - u[i]) / dx - s_cell[i] * g;

  ElasticSolution sol{u, TensorField(n)};
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 t1;
    if (i == 0)
      t1 = 0.5 * (3.0 * flux[0] - flux[1]);
    else if (i + 1 == n)
      t1 = 0.5 * (3.0 * flux[n - 2] - flux[n - 3]);
    else
      t1 = 0.5 * (flux[i - 1] + flux[i]);
    const Vec3 ux = a_llt.solve(t1 + S[i] * g);
    sol.T[i] = D.apply(strain_of_gradient(ux) - S[i] * params.misfit);
  }
  return sol;
}

}  // namespace martensite
