#include "kfmrac/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kfmrac {

bool DiagnosticReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const auto& c) {
    return c.status == CheckStatus::Fail;
  });
}

const DiagnosticCheck* DiagnosticReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Skipped: return "SKIP";
    case CheckStatus::Info: return "INFO";
  }
  return "?";
}

double max_lyapunov_increase(const TimeSeriesLog& log) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < log.rows.size(); ++i) {
    worst = std::max(worst, log.rows[i].V - log.rows[i - 1].V);
  }
  return worst;
}

double tail_error(const TimeSeriesLog& log, double fraction) {
  const auto n = log.rows.size();
  if (n == 0) return 0.0;
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
  double worst = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) {
    worst = std::max({worst, std::abs(log.rows[i].e1),
                      std::abs(log.rows[i].e2_true)});
  }
  return worst;
}

double max_lyapunov_rate_discrepancy(const TimeSeriesLog& log) {
  double worst = 0.0;
  for (std::size_t i = 1; i < log.rows.size(); ++i) {
    const auto& a = log.rows[i - 1];
    const auto& b = log.rows[i];
    const double fd = (b.V - a.V) / (b.t - a.t);
    worst = std::max(worst, std::abs(fd - a.Vdot_analytic));
  }
  return worst;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool all_finite(const TimeSeriesLog& log) {
  for (const auto& r : log.rows) {
    const double vals[] = {r.t,     r.r,    r.x,        r.y,       r.x_m,
                           r.x_hat, r.e1,   r.e2_innov, r.e2_true, r.P,
                           r.L,     r.k_hat, r.l_hat,   r.w_hat,   r.theta,
                           r.u};
    for (double v : vals) {
      if (!std::isfinite(v)) return false;
    }
    if (log.has_lyapunov &&
        (!std::isfinite(r.V) || !std::isfinite(r.Vdot_analytic))) {
      return false;
    }
  }
  return true;
}

}  // namespace

DiagnosticReport diagnose(const TimeSeriesLog& log, const ScenarioConfig& cfg,
                          const DiagnosticTolerances& tol) {
  DiagnosticReport rep;
  const bool noiseless = !cfg.measurement_noise && !cfg.process_noise;
  const bool linear = std::holds_alternative<LinearPlantParams>(cfg.plant);
  const bool complete = log.rows.size() == cfg.step_count() + 1;
  const auto add = [&](std::string name, CheckStatus s, std::string detail) {
    rep.checks.push_back({std::move(name), s, std::move(detail)});
  };

  add("run_complete", complete ? CheckStatus::Pass : CheckStatus::Fail,
      std::to_string(log.rows.size()) + " of " +
          std::to_string(cfg.step_count() + 1) + " samples");
  add("finite_values", all_finite(log) ? CheckStatus::Pass : CheckStatus::Fail,
      "no NaN/Inf in defined columns");

  const double L_max = designer_gain_bound(cfg);
  const GainVerdict gv = check_gain_trajectory(
      log.column(&LogRow::t), log.column(&LogRow::L), log.column(&LogRow::P),
      L_max);
  {
    std::string detail = "L(t) in (0, " + fmt(L_max) + ")";
    if (gv.first_violation_time) {
      detail += "; first violation at t = " + fmt(*gv.first_violation_time);
    }
    add("gain_bound", gv.gain_in_bounds ? CheckStatus::Pass : CheckStatus::Fail,
        detail);
    add("covariance_monotone",
        gv.covariance_monotone ? CheckStatus::Pass : CheckStatus::Fail,
        "P(t) monotone within 1e-15");
  }

  if (!linear || !log.has_lyapunov) {
    const std::string why = "plant truth is not linear";
    add("lyapunov_matrix_positive", CheckStatus::Skipped, why);
    add("lyapunov_nonincreasing", CheckStatus::Skipped, why);
    add("error_convergence", CheckStatus::Skipped, why);
    return rep;
  }

  {
    const auto& lin = std::get<LinearPlantParams>(cfg.plant);
    const LyapunovWeights w = cfg.design.weights();
    const bool blended = cfg.design.mode == ControllerMode::Blended;
    bool ok = true;
    double when = 0.0;
    for (const auto& r : log.rows) {
      const Sym2 U = blended
                         ? u2_matrix(r.L, r.theta, lin.a, cfg.design.reference, w)
                         : u_matrix_lemma(r.L, cfg.design.reference, w);
      if (!U.positive_definite()) {
        ok = false;
        when = r.t;
        break;
      }
    }
    add("lyapunov_matrix_positive", ok ? CheckStatus::Pass : CheckStatus::Fail,
        std::string(blended ? "U2" : "U") + " principal minors > 0" +
            (ok ? "" : "; violated at t = " + fmt(when)));
  }

  if (!noiseless) {
    const std::string why = "noise enabled; Lyapunov decrease is not pathwise";
    add("lyapunov_nonincreasing", CheckStatus::Skipped, why);
    add("error_convergence", CheckStatus::Skipped, why);
    return rep;
  }

  const double v0 = log.rows.empty() ? 0.0 : log.rows.front().V;
  const double slack = tol.lyapunov_slack * std::max(1.0, v0);
  const double rise = max_lyapunov_increase(log);
  add("lyapunov_nonincreasing",
      rise <= slack ? CheckStatus::Pass : CheckStatus::Fail,
      "max V(n+1) - V(n) = " + fmt(rise) + ", slack " + fmt(slack));
  add("lyapunov_rate", CheckStatus::Info,
      "max |dV/dt (finite difference) - Vdot| = " +
          fmt(max_lyapunov_rate_discrepancy(log)));
  const double tail = tail_error(log, tol.tail_fraction);
  const std::string detail = "max(|e1|, |e2|) over final " +
                             fmt(100.0 * tol.tail_fraction) + "% = " + fmt(tail);
  const double t_end = log.rows.empty() ? 0.0 : log.rows.back().t;
  const double window_start = t_end * (1.0 - tol.tail_fraction);
  const bool step_in_window =
      std::any_of(cfg.schedule.begin(), cfg.schedule.end(), [&](const auto& e) {
        return e.start_time > window_start && e.start_time <= t_end;
      });
  if (step_in_window) {
    add("error_convergence", CheckStatus::Skipped,
        "reference step inside the tail window; " + detail);
  } else {
    add("error_convergence",
        tail < tol.convergence ? CheckStatus::Pass : CheckStatus::Fail, detail);
  }
  return rep;
}

}  // namespace kfmrac
