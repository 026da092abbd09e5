#pragma once

#include <cmath>
#include <string>

#include "martensite/errors.hpp"
#include "martensite/tensor.hpp"

namespace martensite {

/// Double-well potential
///
///   psi(S) = theta S^2 (1-S)^2 + tilt S^2 (3 - 2S).
///
/// The tilt term has zero slope at S = 0 and S = 1, so both phase values stay
/// critical points while psi(1) - psi(0) = tilt. The sign conditions
/// psi' > 0 on (0, S_hat) u (1, inf) and psi' < 0 on (S_hat, 1) u (-inf, 0)
/// hold iff |3 tilt| < theta; the barrier sits at S_hat = (theta + 3 tilt) / (2 theta).
class DoubleWell {
 public:
  DoubleWell() : DoubleWell(1.0, 0.0) {}

  DoubleWell(double theta, double tilt) : theta_(theta), tilt_(tilt) {
    if (!(theta > 0.0)) throw ConfigError("double well: theta must be positive");
    if (!(std::abs(3.0 * tilt) < theta))
      throw ConfigError("double well: |3*tilt| must be below theta for the well sign conditions");
    verify_sign_pattern();
  }

  double theta() const { return theta_; }
  double tilt() const { return tilt_; }
  double barrier() const { return (theta_ + 3.0 * tilt_) / (2.0 * theta_); }

  double value(double s) const {
    const double w = s * (1.0 - s);
    return theta_ * w * w + tilt_ * s * s * (3.0 - 2.0 * s);
  }

  double derivative(double s) const {
    return 2.0 * s * (1.0 - s) * (theta_ * (1.0 - 2.0 * s) + 3.0 * tilt_);
  }

  double second_derivative(double s) const {
    return 2.0 * theta_ * (1.0 - 6.0 * s + 6.0 * s * s) + 6.0 * tilt_ * (1.0 - 2.0 * s);
  }

  /// [psi] = psi(1) - psi(0).
  double jump() const { return value(1.0) - value(0.0); }

 private:
  void verify_sign_pattern() const {
    const double s_hat = barrier();
    constexpr int kSamples = 4001;
    for (int i = 0; i < kSamples; ++i) {
      const double s = -2.0 + 5.0 * i / (kSamples - 1);
      const double d = derivative(s);
      const bool positive_zone = (s > 0.0 && s < s_hat) || s > 1.0;
      const bool negative_zone = (s > s_hat && s < 1.0) || s < 0.0;
      if ((positive_zone && !(d > 0.0)) || (negative_zone && !(d < 0.0)))
        throw ConfigError("double well: sign pattern of psi' violated at S = " +
                          std::to_string(s));
    }
  }

  double theta_;
  double tilt_;
};

inline double psi_hat(const DoubleWell& w, double s) { return w.value(s); }
inline double psi_hat_prime(const DoubleWell& w, double s) { return w.derivative(s); }

/// All model constants. Construct through `make` to get validation and the
/// cached projection data.
struct MaterialParams {
  double c = 1.0;      ///< mobility
  double nu = 1e-3;    ///< gradient-energy coefficient
  double kappa = 0.1;  ///< regularization, 0 < kappa < 1
  SymMat3 misfit;      ///< transformation strain eps_bar
  ElasticityTensor D;
  DoubleWell well;
  ProjectionData projection = build_projection(ElasticityTensor(), SymMat3());

  static MaterialParams make(double c, double nu, double kappa, const SymMat3& misfit,
                             const ElasticityTensor& D, const DoubleWell& well) {
    MaterialParams p;
    p.c = c;
    p.nu = nu;
    p.kappa = kappa;
    p.misfit = misfit;
    p.D = D;
    p.well = well;
    p.validate();
    p.projection = build_projection(D, misfit);
    return p;
  }

  MaterialParams with_kappa(double k) const {
    MaterialParams p = *this;
    p.kappa = k;
    p.validate();
    return p;
  }

  MaterialParams with_nu(double n) const {
    MaterialParams p = *this;
    p.nu = n;
    p.validate();
    return p;
  }

  void validate() const {
    if (!(c > 0.0)) throw ConfigError("material: c must be positive");
    if (!(nu > 0.0)) throw ConfigError("material: nu must be positive");
    if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("material: kappa must lie in (0,1)");
  }
};

/// |q|_kappa = sqrt(q^2 + kappa^2).
inline double abs_kappa(double q, double kappa) { return std::hypot(q, kappa); }

/// |q|_kappa - kappa, evaluated as q^2 / (|q|_kappa + kappa) to avoid cancellation.
inline double abs_kappa_excess(double q, double kappa) {
  const double qk = abs_kappa(q, kappa);
  return qk + kappa > 0.0 ? q * q / (qk + kappa) : 0.0;
}

/// Free energy density 1/2 D(eps - eps_bar S).(eps - eps_bar S) + psi(S) + nu/2 Sx^2.
inline double free_energy_density(const SymMat3& eps, double s, double sx,
                                  const MaterialParams& p) {
  const SymMat3 elastic = eps - s * p.misfit;
  return 0.5 * dot(p.D.apply(elastic), elastic) + p.well.value(s) + 0.5 * p.nu * sx * sx;
}

/// psi_S = -T.eps_bar + psi'(S), with T.eps_bar supplied precomputed.
inline double psi_S(double t_dot_eps, double s, const MaterialParams& p) {
  return -t_dot_eps + p.well.derivative(s);
}

/// H_T(p, q, r) = c (T.eps_bar - psi'(p) + nu r) |q|.
inline double hamiltonian_sharp(double t_dot_eps, double pv, double q, double r,
                                const MaterialParams& p) {
  return p.c * (t_dot_eps - p.well.derivative(pv) + p.nu * r) * std::abs(q);
}

/// c nu |q|_k r + c (T.eps_bar - psi'(p)) (|q|_k - k).
inline double hamiltonian_regularized(double t_dot_eps, double pv, double q, double r,
                                      const MaterialParams& p) {
  return p.c * p.nu * abs_kappa(q, p.kappa) * r +
         p.c * (t_dot_eps - p.well.derivative(pv)) * abs_kappa_excess(q, p.kappa);
}

}  // namespace martensite
