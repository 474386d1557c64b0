// Lyapunov machinery behind the two convergence results.
//
// With e = [e1, e2], e1 = x_hat - x_m and e2 = x - x_hat, the candidate
//
//   V = m1 e1^2 / 2 + m2 e2^2 / 2 + |b| (k~^2/g1 + l~^2/g2 + w~^2/g3) / 2
//
// satisfies V' = -e^T U e along noiseless trajectories, with U = U(L) for the
// unblended law and U = U2(L, theta, a) for the blended one. Everything here
// that needs the true plant (k*, l*, parameter errors, U2) is diagnostics
// only and must not feed back into the controller.
#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "kfmrac/controller.hpp"
#include "kfmrac/estimator.hpp"
#include "kfmrac/plant.hpp"

namespace kfmrac {

struct LyapunovWeights {
  double m1 = 1.0;
  double m2 = 70.0;
  double delta = 0.0;      // margin subtracted from U
  double delta_hat = 0.0;  // a_m m1 - delta
};

/// Weights with delta_hat derived from the reference pole. A negative delta
/// selects the default margin 1e-6 a_m m1.
LyapunovWeights make_lyapunov_weights(double m1, double m2,
                                      const ReferenceModelParams& rm,
                                      double delta = -1.0);

struct ErrorState {
  double e1 = 0.0;
  double e2 = 0.0;
  double k_tilde = 0.0;
  double l_tilde = 0.0;
  double w_tilde = 0.0;
};

struct IdealGains {
  double k_star;
  double l_star;
};

/// Gains that make the closed loop equal the reference model:
/// a_m = b k* - a, b_m = b l*. Throws std::invalid_argument if b == 0.
IdealGains ideal_gains(const LinearPlantParams& p,
                       const ReferenceModelParams& rm);

double lyapunov_value(const ErrorState& es, const LyapunovWeights& w,
                      const AdaptationGains& g, double abs_b);

/// Symmetric 2x2 matrix [[a11, a12], [a12, a22]].
struct Sym2 {
  double a11;
  double a12;
  double a22;

  [[nodiscard]] double det() const { return a11 * a22 - a12 * a12; }
  [[nodiscard]] bool positive_definite() const {
    return a11 > 0.0 && det() > 0.0;
  }
  /// e^T M e
  [[nodiscard]] double quadratic_form(double e1, double e2) const {
    return a11 * e1 * e1 + 2.0 * a12 * e1 * e2 + a22 * e2 * e2;
  }
};

Sym2 u_matrix_lemma(double L, const ReferenceModelParams& rm,
                    const LyapunovWeights& w);

Sym2 u2_matrix(double L, double theta, double a,
               const ReferenceModelParams& rm, const LyapunovWeights& w);

/// 4 delta_hat m2 / m1^2. Throws std::invalid_argument if delta_hat <= 0.
double lmax_lemma(const LyapunovWeights& w);

/// Largest L for which the second principal minor of U2 - delta I stays
/// positive with theta at its ceiling theta_max. a_bound is a_max for a
/// positive pole (0 otherwise). Throws std::invalid_argument if
/// a_m - theta_max (a_bound + a_m) < 0 or delta_hat <= 0.
double lmax_theorem(double theta_max, double a_bound,
                    const ReferenceModelParams& rm, const LyapunovWeights& w);

/// Second principal minor of U2 - delta I, with delta_hat = a_m m1 - delta.
double theorem_minor(double L, double theta, double a,
                     const ReferenceModelParams& rm, const LyapunovWeights& w);

struct GainVerdict {
  bool pass = true;
  bool gain_in_bounds = true;
  bool covariance_monotone = true;
  std::optional<std::size_t> first_violation;  // sample index
  std::optional<double> first_violation_time;
  std::optional<std::size_t> first_monotonicity_violation;
};

/// Every L(t) must lie in (0, L_max) and P(t) must be monotone (direction
/// taken from its endpoints). monotone_slack is the largest tolerated step
/// against the trend.
GainVerdict check_gain_trajectory(std::span<const double> t,
                                  std::span<const double> L,
                                  std::span<const double> P, double L_max,
                                  double monotone_slack = 1e-15);

}  // namespace kfmrac
