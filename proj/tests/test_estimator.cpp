#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "kfmrac/estimator.hpp"

namespace kfmrac {
namespace {

constexpr double kQ = 5e-7;
constexpr double kR = 3e-4;
const ReferenceModelParams kUnit{1.0, 1.0};

// Integrates the Riccati equation until |P'| is negligible; returns L.
double integrate_riccati_gain(const ReferenceModelParams& rm, double Q, double R,
                              double P0, double dt) {
  double P = P0;
  for (int i = 0; i < 10'000'000; ++i) {
    if (std::abs(riccati_deriv(P, rm, Q, R)) < 1e-14) break;
    P = riccati_rk4_step(P, rm, Q, R, dt);
  }
  return kalman_gain(P, R);
}

TEST(ReferenceModel, Examples) {
  EXPECT_EQ(reference_deriv(0.0, 0.0, kUnit), 0.0);
  EXPECT_EQ(reference_deriv(0.2, 0.2, kUnit), 0.0);
}

TEST(ReferenceModel, StepResponseMatchesClosedForm) {
  // RK4 on x_m' = -x_m + 0.2 against 0.2 (1 - e^{-t}).
  double x = 0.0;
  const double dt = 0.01;
  for (int i = 0; i < 100; ++i) {
    const double k1 = reference_deriv(x, 0.2, kUnit);
    const double k2 = reference_deriv(x + 0.5 * dt * k1, 0.2, kUnit);
    const double k3 = reference_deriv(x + 0.5 * dt * k2, 0.2, kUnit);
    const double k4 = reference_deriv(x + dt * k3, 0.2, kUnit);
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  EXPECT_NEAR(x, 0.2 * (1.0 - std::exp(-1.0)), 1e-10);
  EXPECT_NEAR(x, 0.12642, 1e-5);
}

TEST(Observer, Examples) {
  EXPECT_EQ(observer_deriv(0.0, 0.0, 0.0, 0.7, kUnit), 0.0);
  EXPECT_DOUBLE_EQ(observer_deriv(0.0, 0.0, 1.0, 0.5, kUnit), 0.5);
}

TEST(Observer, ZeroGainIsReferenceModel) {
  const ReferenceModelParams rm{1.7, 0.4};
  for (double xh : {-1.0, 0.0, 0.3}) {
    for (double r : {-0.2, 0.0, 0.5}) {
      for (double y : {-3.0, 0.1, 9.0}) {
        EXPECT_EQ(observer_deriv(xh, r, y, 0.0, rm), reference_deriv(xh, r, rm));
      }
    }
  }
}

TEST(KalmanGain, Examples) {
  EXPECT_EQ(kalman_gain(0.0, kR), 0.0);
  EXPECT_EQ(kalman_gain(kR, kR), 1.0);
  EXPECT_NEAR(kalman_gain(2.499e-7, kR), 8.33e-4, 1e-6);
}

TEST(KalmanGain, RejectsNonPositiveR) {
  EXPECT_THROW(kalman_gain(1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(kalman_gain(1.0, -1.0), std::invalid_argument);
  EXPECT_THROW(riccati_deriv(1.0, kUnit, kQ, 0.0), std::invalid_argument);
}

TEST(Riccati, Examples) {
  const double P_inf = kR * (-1.0 + std::sqrt(1.0 + kQ / kR));
  EXPECT_LT(std::abs(riccati_deriv(P_inf, kUnit, kQ, kR)), 1e-12);
  EXPECT_EQ(riccati_deriv(0.0, kUnit, kQ, kR), kQ);
  EXPECT_DOUBLE_EQ(riccati_deriv(1.0, kUnit, 0.0, 1.0), -3.0);
}

TEST(SteadyStateGain, Examples) {
  EXPECT_EQ(steady_state_gain(kUnit, 0.0, 1.0), 0.0);
  EXPECT_NEAR(steady_state_gain(kUnit, kQ, kR), 8.3299e-4, 1e-8);
  EXPECT_NEAR(steady_state_gain({2.0, 1.0}, 3.0, 1.0), -2.0 + std::sqrt(7.0), 1e-15);
}

TEST(SteadyStateGain, MatchesIntegratedRiccati) {
  const double l1 = integrate_riccati_gain(kUnit, kQ, kR, kR, 0.01);
  EXPECT_NEAR(l1 / steady_state_gain(kUnit, kQ, kR), 1.0, 1e-6);
  const ReferenceModelParams rm2{2.0, 1.0};
  const double l2 = integrate_riccati_gain(rm2, 3.0, 1.0, 0.0, 0.01);
  EXPECT_NEAR(l2 / steady_state_gain(rm2, 3.0, 1.0), 1.0, 1e-6);
}

TEST(Riccati, MonotoneAndNonNegativeFromTypicalStarts) {
  const double P_inf = kR * steady_state_gain(kUnit, kQ, kR);
  for (double P0 : {0.0, P_inf, kR, 10 * kR}) {
    double P = P0;
    const double dir = P0 >= P_inf ? -1.0 : 1.0;
    for (int i = 0; i < 5000; ++i) {
      const double next = riccati_rk4_step(P, kUnit, kQ, kR, 0.01);
      EXPECT_GE(next, 0.0);
      EXPECT_GE(dir * (next - P), -1e-15) << "P0=" << P0 << " step " << i;
      P = next;
    }
  }
}

TEST(Riccati, ClampsUndershootAtZero) {
  // Huge step with Q = 0 overshoots below zero without the clamp.
  EXPECT_GE(riccati_rk4_step(1.0, kUnit, 0.0, 1e-3, 10.0), 0.0);
}

}  // namespace
}  // namespace kfmrac
