#pragma once

// Small-dimension tensor algebra for the one-dimensional reduction:
// symmetric 3x3 matrices, the elasticity tensor D acting on them, and the
// D-orthogonal projection onto the strains reachable by a 1D displacement.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "martensite/errors.hpp"

namespace martensite {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Symmetric 3x3 matrix. Only the six independent entries are stored, so
/// symmetry holds by construction.
struct SymMat3 {
  double a11 = 0.0, a22 = 0.0, a33 = 0.0;
  double a12 = 0.0, a13 = 0.0, a23 = 0.0;

  static SymMat3 zero() { return {}; }
  static SymMat3 diag(double d1, double d2, double d3) { return {d1, d2, d3, 0.0, 0.0, 0.0}; }
  static SymMat3 identity() { return diag(1.0, 1.0, 1.0); }

  static SymMat3 from_full(const Mat3& m) {
    return {m(0, 0), m(1, 1), m(2, 2), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)),
            0.5 * (m(1, 2) + m(2, 1))};
  }

  Mat3 full() const {
    Mat3 m;
    m << a11, a12, a13, a12, a22, a23, a13, a23, a33;
    return m;
  }

  double operator()(int i, int j) const {
    if (i == j) return i == 0 ? a11 : (i == 1 ? a22 : a33);
    const int lo = i < j ? i : j;
    const int hi = i < j ? j : i;
    if (lo == 0) return hi == 1 ? a12 : a13;
    return a23;
  }

  /// Mandel coordinates (a11, a22, a33, sqrt2 a12, sqrt2 a13, sqrt2 a23).
  /// In this basis the matrix scalar product is the Euclidean one.
  Vec6 mandel() const {
    Vec6 v;
    v << a11, a22, a33, kSqrt2 * a12, kSqrt2 * a13, kSqrt2 * a23;
    return v;
  }

  static SymMat3 from_mandel(const Vec6& v) {
    return {v(0), v(1), v(2), v(3) / kSqrt2, v(4) / kSqrt2, v(5) / kSqrt2};
  }

  /// First column (T11, T21, T31).
  Vec3 first_column() const { return {a11, a12, a13}; }

  SymMat3& operator+=(const SymMat3& o) {
    a11 += o.a11, a22 += o.a22, a33 += o.a33, a12 += o.a12, a13 += o.a13, a23 += o.a23;
    return *this;
  }
  SymMat3& operator-=(const SymMat3& o) {
    a11 -= o.a11, a22 -= o.a22, a33 -= o.a33, a12 -= o.a12, a13 -= o.a13, a23 -= o.a23;
    return *this;
  }
  SymMat3& operator*=(double s) {
    a11 *= s, a22 *= s, a33 *= s, a12 *= s, a13 *= s, a23 *= s;
    return *this;
  }

  friend SymMat3 operator+(SymMat3 a, const SymMat3& b) { return a += b; }
  friend SymMat3 operator-(SymMat3 a, const SymMat3& b) { return a -= b; }
  friend SymMat3 operator-(SymMat3 a) { return a *= -1.0; }
  friend SymMat3 operator*(double s, SymMat3 a) { return a *= s; }
  friend SymMat3 operator*(SymMat3 a, double s) { return a *= s; }

  double max_abs() const {
    return std::max({std::abs(a11), std::abs(a22), std::abs(a33), std::abs(a12), std::abs(a13),
                     std::abs(a23)});
  }
};

/// sigma . tau = sum_ij sigma_ij tau_ij; off-diagonal entries count twice.
inline double dot(const SymMat3& s, const SymMat3& t) {
  return s.a11 * t.a11 + s.a22 * t.a22 + s.a33 * t.a33 +
         2.0 * (s.a12 * t.a12 + s.a13 * t.a13 + s.a23 * t.a23);
}

/// eps(v) = 1/2 ((v,0,0) + transpose): the strain of a displacement gradient
/// pointing only in the x direction.
inline SymMat3 strain_of_gradient(const Vec3& v) {
  return {v(0), 0.0, 0.0, 0.5 * v(1), 0.5 * v(2), 0.0};
}

/// Elasticity tensor D, stored as its 6x6 matrix in Mandel coordinates.
/// D is symmetric with respect to `dot` exactly when this matrix is symmetric.
class ElasticityTensor {
 public:
  ElasticityTensor() : ElasticityTensor(Mat6::Identity()) {}

  /// Throws NonPositiveDefinite unless the matrix is symmetric (to 1e-12
  /// relative) and admits a Cholesky factorization.
  explicit ElasticityTensor(const Mat6& mandel) : m_(mandel) {
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw NonPositiveDefinite("elasticity tensor: 6x6 representation is not symmetric");
    m_ = 0.5 * (m_ + m_.transpose());
    llt_.compute(m_);
    if (llt_.info() != Eigen::Success)
      throw NonPositiveDefinite("elasticity tensor: Cholesky factorization failed");
    for (int i = 0; i < 6; ++i) {
      if (!(llt_.matrixL()(i, i) > 0.0))
        throw NonPositiveDefinite("elasticity tensor: non-positive Cholesky pivot");
    }
  }

  /// D sigma = lambda tr(sigma) I + 2 mu sigma. Requires mu > 0 and 3 lambda + 2 mu > 0.
  static ElasticityTensor isotropic(double lambda, double mu) {
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
      throw NonPositiveDefinite("isotropic elasticity: need mu > 0 and 3*lambda + 2*mu > 0");
    Mat6 m = 2.0 * mu * Mat6::Identity();
    m.topLeftCorner<3, 3>().array() += lambda;
    return ElasticityTensor(m);
  }

  static ElasticityTensor identity() { return ElasticityTensor(Mat6::Identity()); }

  /// Row-major upper triangle (21 entries) of the Mandel matrix.
  static ElasticityTensor from_upper_triangle(const std::array<double, 21>& upper) {
    Mat6 m;
    int k = 0;
    for (int i = 0; i < 6; ++i) {
      for (int j = i; j < 6; ++j) {
        m(i, j) = upper[k];
        m(j, i) = upper[k];
        ++k;
      }
    }
    return ElasticityTensor(m);
  }

  const Mat6& mandel() const { return m_; }

  SymMat3 apply(const SymMat3& s) const { return SymMat3::from_mandel(m_ * s.mandel()); }
  SymMat3 apply_inverse(const SymMat3& s) const {
    return SymMat3::from_mandel(llt_.solve(s.mandel()));
  }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Mat6> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

 private:
  Mat6 m_;
  Eigen::LLT<Mat6> llt_;
};

inline SymMat3 apply_D(const ElasticityTensor& D, const SymMat3& s) { return D.apply(s); }

/// Quantities attached to the D-orthogonal projection Q onto the subspace of
/// strains eps(v), v in R^3.
struct ProjectionData {
  Mat3 gram;          ///< G_kl = dot(D e_k, e_l), e_k = eps(unit_k)
  SymMat3 eps_star;   ///< Q applied to the misfit strain
  Vec3 u_star;        ///< (eps*_11, 2 eps*_21, 2 eps*_31)
  Mat3 correction;    ///< A with A v = first column of D eps(v); equals gram
  Eigen::LLT<Mat3> correction_llt;

  /// Solves A x = rhs.
  Vec3 solve(const Vec3& rhs) const { return correction_llt.solve(rhs); }
};

inline ProjectionData build_projection(const ElasticityTensor& D, const SymMat3& misfit) {
  std::array<SymMat3, 3> basis{strain_of_gradient(Vec3::UnitX()),
                               strain_of_gradient(Vec3::UnitY()),
                               strain_of_gradient(Vec3::UnitZ())};
  std::array<SymMat3, 3> d_basis{D.apply(basis[0]), D.apply(basis[1]), D.apply(basis[2])};

  ProjectionData p;
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) p.gram(k, l) = dot(d_basis[k], basis[l]);
  p.gram = 0.5 * (p.gram + p.gram.transpose());

  for (int l = 0; l < 3; ++l) p.correction.col(l) = d_basis[l].first_column();
  p.correction = 0.5 * (p.correction + p.correction.transpose());

  Eigen::LLT<Mat3> gram_llt(p.gram);
  if (gram_llt.info() != Eigen::Success)
    throw NonPositiveDefinite("projection: Gram matrix is not positive definite");
  p.correction_llt.compute(p.correction);
  if (p.correction_llt.info() != Eigen::Success)
    throw NonPositiveDefinite("projection: correction matrix is not positive definite");

  const SymMat3 d_misfit = D.apply(misfit);
  Vec3 rhs;
  for (int k = 0; k < 3; ++k) rhs(k) = dot(d_misfit, basis[k]);
  const Vec3 coeff = gram_llt.solve(rhs);

  p.eps_star = strain_of_gradient(coeff);
  p.u_star = coeff;
  return p;
}

}  // namespace martensite
