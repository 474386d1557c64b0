// Stability verdicts computed over a finished log.
#pragma once

#include <string>
#include <vector>

#include "kfmrac/sim.hpp"

namespace kfmrac {

enum class CheckStatus { Pass, Fail, Skipped, Info };

struct DiagnosticCheck {
  std::string name;
  CheckStatus status;
  std::string detail;
};

struct DiagnosticReport {
  std::vector<DiagnosticCheck> checks;

  /// No check failed. Skipped and informational entries do not count.
  [[nodiscard]] bool passed() const;
  [[nodiscard]] const DiagnosticCheck* find(const std::string& name) const;
};

/// Tolerances for the noiseless Lyapunov assertions.
struct DiagnosticTolerances {
  double lyapunov_slack = 1e-9;  // times max(1, V(0)), per step
  double convergence = 1e-3;     // max |e1|, |e2| over the tail
  double tail_fraction = 0.1;
};

/// Runs every check applicable to the config: gain bound and P monotonicity
/// always; Lyapunov and convergence checks only for noiseless linear-plant
/// runs. The convergence check is skipped when a reference step falls inside
/// the tail window, since the step restarts the transient.
DiagnosticReport diagnose(const TimeSeriesLog& log, const ScenarioConfig& cfg,
                          const DiagnosticTolerances& tol = {});

/// Largest per-step increase V(n+1) - V(n).
double max_lyapunov_increase(const TimeSeriesLog& log);

/// max(|e1|, |e2_true|) over the final `fraction` of the log.
double tail_error(const TimeSeriesLog& log, double fraction);

/// Largest |(V(n+1) - V(n)) / dt - Vdot_analytic(n)|.
double max_lyapunov_rate_discrepancy(const TimeSeriesLog& log);

const char* to_string(CheckStatus s);

}  // namespace kfmrac
