// Adaptive feedback laws.
//
// Two schemes share the same l_hat / w_hat adaptation:
//  * unblended: state feedback on the raw measurement y,
//  * blended:   state feedback on theta(e2) x_hat + (1 - theta(e2)) y, with
//               theta a logistic weight that falls off as the innovation
//               grows.
//
// e2 is always the innovation y - x_hat here; the true plant state is never
// available to the controller.
#pragma once

#include "kfmrac/plant.hpp"

namespace kfmrac {

enum class ControllerMode { Unblended, Blended };

struct AdaptedParams {
  double k_hat = 0.0;
  double l_hat = 0.0;
  double w_hat = 0.0;
  bool operator==(const AdaptedParams&) const = default;
};

struct AdaptationGains {
  double gamma1 = 50.0;
  double gamma2 = 50.0;
  double gamma3 = 5.0;
  double m2 = 70.0;
  double sign_b = 1.0;  // +1 or -1
};

struct BlendingParams {
  double alpha = 1.0;  // ceiling of theta, in (0, 1]
  double beta = 1.0;   // steepness, > 0
};

struct AdaptationRates {
  double dk_hat = 0.0;
  double dl_hat = 0.0;
  double dw_hat = 0.0;
};

/// Largest admissible blending ceiling: 1 for a non-positive pole,
/// a_m / (a_m + a_max) otherwise. Throws std::invalid_argument when a
/// positive pole is declared without a positive bound.
double compute_alpha(PoleSign sign_a, double a_max, double a_m);

/// theta(e2) = 2 alpha / (1 + exp(beta |e2|)), in (0, alpha].
double blending_theta(double e2, const BlendingParams& p);

double control_unblended(const AdaptedParams& ap, double y, double r);

double control_blended(const AdaptedParams& ap, double y, double x_hat,
                       double theta, double r);

AdaptationRates adapt_derivs_unblended(double y, double r, double e2,
                                       const AdaptationGains& g);

/// dk_hat for the blended law. l_hat and w_hat rates are unchanged.
double adapt_deriv_k_blended(double y, double x_hat, double theta, double e2,
                             const AdaptationGains& g);

/// Full adaptation rates for the blended scheme.
AdaptationRates adapt_derivs_blended(double y, double x_hat, double theta,
                                     double r, double e2,
                                     const AdaptationGains& g);

}  // namespace kfmrac
