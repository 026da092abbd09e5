#include <gtest/gtest.h>

#include <random>

#include "martensite/material.hpp"
#include "property_suites.hpp"

using namespace martensite;

TEST(DoubleWell, RejectsInvalidParameters) {
  EXPECT_THROW(DoubleWell(0.0, 0.0), ConfigError);
  EXPECT_THROW(DoubleWell(1.0, 1.0 / 3.0), ConfigError);
  EXPECT_THROW(DoubleWell(1.0, -0.34), ConfigError);
  EXPECT_NO_THROW(DoubleWell(1.0, 0.33));
}

TEST(DoubleWell, DerivativesMatchFiniteDifferences) {
  const DoubleWell w(1.3, -0.2);
  const double h = 1e-5;
  for (double s = -0.5; s <= 1.5; s += 0.05) {
    EXPECT_NEAR(w.derivative(s), (w.value(s + h) - w.value(s - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(w.second_derivative(s), (w.derivative(s + h) - w.derivative(s - h)) / (2 * h), 1e-8);
  }
}

TEST(DoubleWell, PhasesAreCriticalAndJumpEqualsTilt) {
  const DoubleWell w(2.0, 0.25);
  EXPECT_EQ(w.derivative(0.0), 0.0);
  EXPECT_EQ(w.derivative(1.0), 0.0);
  EXPECT_DOUBLE_EQ(w.jump(), 0.25);
  EXPECT_NEAR(w.derivative(w.barrier()), 0.0, 1e-15);
}

TEST(DoubleWell, RandomizedSignPattern) {
  const auto r = suites::double_well_suite(1000, 314159);
  EXPECT_TRUE(r.passed()) << r.failures << " failures, first: " << r.first_failure;
}

TEST(Hamiltonian, RandomizedKappaBound) {
  const auto r = suites::hamiltonian_suite(1000, 271828);
  EXPECT_TRUE(r.passed()) << r.failures << " failures, first: " << r.first_failure;
}

TEST(Hamiltonian, AbsKappaExcessIsStable) {
  EXPECT_DOUBLE_EQ(abs_kappa_excess(0.0, 0.1), 0.0);
  EXPECT_NEAR(abs_kappa_excess(3.0, 4.0), 1.0, 1e-15);
  // q much smaller than kappa: q^2 / (2 kappa) without cancellation.
  EXPECT_NEAR(abs_kappa_excess(1e-9, 1e-1) / (1e-18 / 0.2), 1.0, 1e-12);
}

TEST(Hamiltonian, VanishesWhereGradientVanishes) {
  MaterialParams p;
  EXPECT_EQ(hamiltonian_sharp(0.3, 0.4, 0.0, 5.0, p), 0.0);
  // The regularized one keeps the curvature term c nu kappa r.
  EXPECT_NEAR(hamiltonian_regularized(0.3, 0.4, 0.0, 5.0, p), p.c * p.nu * p.kappa * 5.0, 1e-15);
}

TEST(FreeEnergy, PartialDerivativeInSIsPsiS) {
  const auto D = ElasticityTensor::isotropic(1.0, 2.0);
  const SymMat3 misfit{0.1, -0.05, 0.02, 0.03, 0.0, 0.01};
  const auto p = MaterialParams::make(1.0, 1e-3, 0.1, misfit, D, DoubleWell(1.0, 0.1));
  const SymMat3 eps{0.02, 0.01, -0.03, 0.015, -0.01, 0.005};
  const double h = 1e-6;
  for (double s = -0.2; s <= 1.2; s += 0.1) {
    const SymMat3 T = D.apply(eps - s * misfit);
    const double fd = (free_energy_density(eps, s + h, 0.3, p) - free_energy_density(eps, s - h, 0.3, p)) / (2 * h);
    EXPECT_NEAR(psi_S(dot(T, misfit), s, p), fd, 1e-8);
  }
}

TEST(MaterialParams, Validation) {
  const auto D = ElasticityTensor::identity();
  EXPECT_THROW(MaterialParams::make(0.0, 1e-3, 0.1, {}, D, {}), ConfigError);
  EXPECT_THROW(MaterialParams::make(1.0, 0.0, 0.1, {}, D, {}), ConfigError);
  EXPECT_THROW(MaterialParams::make(1.0, 1e-3, 1.0, {}, D, {}), ConfigError);
  EXPECT_THROW(MaterialParams::make(1.0, 1e-3, 0.1, {}, D, {}).with_kappa(0.0), ConfigError);
}
