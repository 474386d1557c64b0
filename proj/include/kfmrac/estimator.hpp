// Reference model and the Kalman-Bucy observer built on top of it.
//
// The observer's system model *is* the reference model, so the filter needs
// no knowledge of the true plant. Its gain comes from the scalar Riccati
// equation
//
//   P' = Q - 2 a_m P - P^2 / R,   L = P / R.
#pragma once

namespace kfmrac {

/// x_m' = -a_m x_m + b_m r. a_m is stored positive.
struct ReferenceModelParams {
  double a_m = 1.0;
  double b_m = 1.0;
};

struct ObserverState {
  double x_hat = 0.0;
  double P = 0.0;
  double L = 0.0;
};

double reference_deriv(double x_m, double r, const ReferenceModelParams& p);

double observer_deriv(double x_hat, double r, double y, double L,
                      const ReferenceModelParams& p);

/// Throws std::invalid_argument if R <= 0.
double kalman_gain(double P, double R);

/// Throws std::invalid_argument if R <= 0.
double riccati_deriv(double P, const ReferenceModelParams& p, double Q,
                     double R);

/// Limit of L(t): -a_m + sqrt(a_m^2 + Q/R).
double steady_state_gain(const ReferenceModelParams& p, double Q, double R);

/// One classical RK4 step of the Riccati equation, clamped at P >= 0.
double riccati_rk4_step(double P, const ReferenceModelParams& p, double Q,
                        double R, double dt);

}  // namespace kfmrac
