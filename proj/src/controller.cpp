#include "kfmrac/controller.hpp"

#include <cmath>
#include <stdexcept>

namespace kfmrac {

double compute_alpha(PoleSign sign_a, double a_max, double a_m) {
  if (!(a_m > 0.0)) {
    throw std::invalid_argument("reference pole a_m must be > 0");
  }
  if (sign_a == PoleSign::NonPositive) return 1.0;
  if (!(a_max > 0.0)) {
    throw std::invalid_argument(
        "a_max must be > 0 when the plant pole is declared positive");
  }
  return a_m / (a_m + a_max);
}

double blending_theta(double e2, const BlendingParams& p) {
  // 2a / (1 + e^s) == 2a e^-s / (1 + e^-s); the latter underflows to 0
  // instead of overflowing for large |e2|.
  const double decay = std::exp(-p.beta * std::abs(e2));
  return 2.0 * p.alpha * decay / (1.0 + decay);
}

double control_unblended(const AdaptedParams& ap, double y, double r) {
  return -ap.k_hat * y + ap.l_hat * r + ap.w_hat;
}

double control_blended(const AdaptedParams& ap, double y, double x_hat,
                       double theta, double r) {
  const double feedback = theta * x_hat + (1.0 - theta) * y;
  return -ap.k_hat * feedback + ap.l_hat * r + ap.w_hat;
}

AdaptationRates adapt_derivs_unblended(double y, double r, double e2,
                                       const AdaptationGains& g) {
  return {
      g.sign_b * y * g.gamma1 * g.m2 * e2,
      -g.sign_b * r * g.gamma2 * g.m2 * e2,
      -g.sign_b * g.gamma3 * g.m2 * e2,
  };
}

double adapt_deriv_k_blended(double y, double x_hat, double theta, double e2,
                             const AdaptationGains& g) {
  const double regressor = (1.0 - theta) * y + theta * x_hat;
  return g.sign_b * regressor * g.gamma1 * g.m2 * e2;
}

AdaptationRates adapt_derivs_blended(double y, double x_hat, double theta,
                                     double r, double e2,
                                     const AdaptationGains& g) {
  AdaptationRates rates = adapt_derivs_unblended(y, r, e2, g);
  rates.dk_hat = adapt_deriv_k_blended(y, x_hat, theta, e2, g);
  return rates;
}

}  // namespace kfmrac
