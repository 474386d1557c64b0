#include "kfmrac/stability.hpp"

#include <cmath>
#include <stdexcept>

namespace kfmrac {

LyapunovWeights make_lyapunov_weights(double m1, double m2,
                                      const ReferenceModelParams& rm,
                                      double delta) {
  LyapunovWeights w;
  w.m1 = m1;
  w.m2 = m2;
  w.delta = delta < 0.0 ? 1e-6 * rm.a_m * m1 : delta;
  w.delta_hat = rm.a_m * m1 - w.delta;
  return w;
}

IdealGains ideal_gains(const LinearPlantParams& p,
                       const ReferenceModelParams& rm) {
  if (p.b == 0.0) throw std::invalid_argument("plant input gain b is zero");
  return {(rm.a_m + p.a) / p.b, rm.b_m / p.b};
}

double lyapunov_value(const ErrorState& es, const LyapunovWeights& w,
                      const AdaptationGains& g, double abs_b) {
  return 0.5 * w.m1 * es.e1 * es.e1 + 0.5 * w.m2 * es.e2 * es.e2 +
         abs_b / (2.0 * g.gamma1) * es.k_tilde * es.k_tilde +
         abs_b / (2.0 * g.gamma2) * es.l_tilde * es.l_tilde +
         abs_b / (2.0 * g.gamma3) * es.w_tilde * es.w_tilde;
}

Sym2 u_matrix_lemma(double L, const ReferenceModelParams& rm,
                    const LyapunovWeights& w) {
  return {rm.a_m * w.m1, -0.5 * L * w.m1, (L + rm.a_m) * w.m2};
}

Sym2 u2_matrix(double L, double theta, double a,
               const ReferenceModelParams& rm, const LyapunovWeights& w) {
  return {rm.a_m * w.m1, -0.5 * L * w.m1,
          w.m2 * (L + rm.a_m - theta * (a + rm.a_m))};
}

double lmax_lemma(const LyapunovWeights& w) {
  if (!(w.delta_hat > 0.0)) {
    throw std::invalid_argument("delta_hat = a_m m1 - delta must be > 0");
  }
  return 4.0 * w.delta_hat * w.m2 / (w.m1 * w.m1);
}

double theorem_minor(double L, double theta, double a,
                     const ReferenceModelParams& rm,
                     const LyapunovWeights& w) {
  const double slack = L + rm.a_m - theta * (a + rm.a_m);
  return w.delta_hat * (slack * w.m2 - w.delta) - 0.25 * L * L * w.m1 * w.m1;
}

double lmax_theorem(double theta_max, double a_bound,
                    const ReferenceModelParams& rm, const LyapunovWeights& w) {
  if (!(w.delta_hat > 0.0)) {
    throw std::invalid_argument("delta_hat = a_m m1 - delta must be > 0");
  }
  double ceiling = rm.a_m - theta_max * (a_bound + rm.a_m);
  // alpha = a_m / (a_m + a_max) makes this exactly zero in exact arithmetic; allow for
  // the rounding of that quotient.
  if (ceiling < 0.0 && ceiling > -1e-12 * rm.a_m) ceiling = 0.0;
  if (ceiling < 0.0) {
    throw std::invalid_argument(
        "blending ceiling too large for the pole bound: "
        "a_m - theta_max (a_bound + a_m) < 0");
  }
  // (m1^2/4) L^2 - dh m2 L - dh (ceiling m2 - delta) = 0, larger root.
  const double quad = 0.25 * w.m1 * w.m1;
  const double lin = w.delta_hat * w.m2;
  const double constant = w.delta_hat * (ceiling * w.m2 - w.delta);
  const double disc = lin * lin + 4.0 * quad * constant;
  if (disc < 0.0) {
    throw std::invalid_argument("no admissible observer gain for these weights");
  }
  return (lin + std::sqrt(disc)) / (2.0 * quad);
}

GainVerdict check_gain_trajectory(std::span<const double> t,
                                  std::span<const double> L,
                                  std::span<const double> P, double L_max,
                                  double monotone_slack) {
  GainVerdict v;
  for (std::size_t i = 0; i < L.size(); ++i) {
    if (!(L[i] > 0.0 && L[i] < L_max)) {
      v.gain_in_bounds = false;
      v.first_violation = i;
      if (i < t.size()) v.first_violation_time = t[i];
      break;
    }
  }
  if (P.size() >= 2) {
    const double direction = P.back() >= P.front() ? 1.0 : -1.0;
    for (std::size_t i = 1; i < P.size(); ++i) {
      if (direction * (P[i] - P[i - 1]) < -monotone_slack) {
        v.covariance_monotone = false;
        v.first_monotonicity_violation = i;
        break;
      }
    }
  }
  v.pass = v.gain_in_bounds && v.covariance_monotone;
  return v;
}

}  // namespace kfmrac
