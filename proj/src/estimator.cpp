#include "kfmrac/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kfmrac {

namespace {
void require_positive_r(double R) {
  if (!(R > 0.0)) {
    throw std::invalid_argument("measurement variance R must be > 0");
  }
}
}  // namespace

double reference_deriv(double x_m, double r, const ReferenceModelParams& p) {
  return -p.a_m * x_m + p.b_m * r;
}

double observer_deriv(double x_hat, double r, double y, double L,
                      const ReferenceModelParams& p) {
  return -p.a_m * x_hat + p.b_m * r + L * (y - x_hat);
}

double kalman_gain(double P, double R) {
  require_positive_r(R);
  return P / R;
}

double riccati_deriv(double P, const ReferenceModelParams& p, double Q,
                     double R) {
  require_positive_r(R);
  return Q - 2.0 * p.a_m * P - P * P / R;
}

double steady_state_gain(const ReferenceModelParams& p, double Q, double R) {
  require_positive_r(R);
  if (Q < 0.0) throw std::invalid_argument("process variance Q must be >= 0");
  // Written as Q/R / (a_m + sqrt(a_m^2 + Q/R)) to avoid cancellation when
  // Q/R << a_m^2.
  const double q_over_r = Q / R;
  return q_over_r / (p.a_m + std::sqrt(p.a_m * p.a_m + q_over_r));
}

double riccati_rk4_step(double P, const ReferenceModelParams& p, double Q,
                        double R, double dt) {
  const double k1 = riccati_deriv(P, p, Q, R);
  const double k2 = riccati_deriv(P + 0.5 * dt * k1, p, Q, R);
  const double k3 = riccati_deriv(P + 0.5 * dt * k2, p, Q, R);
  const double k4 = riccati_deriv(P + dt * k3, p, Q, R);
  return std::max(0.0, P + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace kfmrac
