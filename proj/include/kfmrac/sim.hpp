// Fixed-step closed-loop simulation.
//
// One scenario integrates the plant, reference model, observer, Riccati
// equation and adaptation laws together with classical RK4. Measurement
// noise is drawn once per control period; process noise is added to the
// plant state after each integration step as an Euler-Maruyama increment.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kfmrac/controller.hpp"
#include "kfmrac/estimator.hpp"
#include "kfmrac/plant.hpp"
#include "kfmrac/stability.hpp"

namespace kfmrac {

struct ScheduleEntry {
  double start_time;
  double value;
  bool operator==(const ScheduleEntry&) const = default;
};

/// How the controller sees the plant between integration steps.
///
/// Continuous: the control and adaptation laws are re-evaluated at every
/// RK4 stage from the stage state, with the measurement-noise sample held
/// for the control period. This integrates the continuous-time laws.
///
/// ZeroOrderHold: y, theta and u are sampled once per control period and
/// held while every state integrates. Emulates a sampled controller.
enum class ControlHold { Continuous, ZeroOrderHold };

struct DesignParams {
  ControllerMode mode = ControllerMode::Blended;
  ReferenceModelParams reference;
  double Q = 5e-7;
  double R = 3e-4;
  AdaptationGains gains;
  double m1 = 1.0;
  /// Unset means compute_alpha(sign_a, a_max, a_m). Ignored (theta == 0)
  /// in unblended mode.
  std::optional<double> alpha;
  double beta = 1.0;
  PoleSign sign_a = PoleSign::NonPositive;
  double a_max = 0.0;
  /// Lyapunov margin; unset means 1e-6 a_m m1.
  std::optional<double> delta;

  [[nodiscard]] double resolved_alpha() const;
  [[nodiscard]] BlendingParams blending() const;
  [[nodiscard]] LyapunovWeights weights() const;
};

struct InitialConditions {
  double x = 0.0;
  double x_m = 0.0;
  double x_hat = 0.0;
  std::optional<double> P;  // unset means R
  double k_hat = 0.0;
  double l_hat = 0.0;
  double w_hat = 0.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  PlantParams plant = LinearPlantParams{};
  DesignParams design;
  std::vector<ScheduleEntry> schedule;
  double dt = 0.01;
  double duration = 120.0;
  /// Unset means dt. Must be an integer multiple of dt.
  std::optional<double> control_period;
  ControlHold hold = ControlHold::Continuous;
  std::uint64_t seed = 1;
  InitialConditions initial;
  bool measurement_noise = true;
  bool process_noise = true;
  double divergence_threshold = 1e6;

  [[nodiscard]] double initial_covariance() const {
    return initial.P.value_or(design.R);
  }
  [[nodiscard]] std::size_t control_ratio() const;
  /// Number of integration steps; the log holds step_count() + 1 samples.
  [[nodiscard]] std::size_t step_count() const;
};

/// Lists every violated invariant; empty when the config is runnable.
std::vector<std::string> validate(const ScenarioConfig& cfg);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct SimState {
  double x = 0.0;
  double x_m = 0.0;
  double x_hat = 0.0;
  double P = 0.0;
  double k_hat = 0.0;
  double l_hat = 0.0;
  double w_hat = 0.0;
};

SimState initial_state(const ScenarioConfig& cfg);

/// One logged sample, in CSV column order.
struct LogRow {
  double t;
  double r;
  double x;
  double y;
  double x_m;
  double x_hat;
  double e1;
  double e2_innov;
  double e2_true;
  double P;
  double L;
  double k_hat;
  double l_hat;
  double w_hat;
  double theta;
  double u;
  double V;              // NaN when the plant truth is not linear
  double Vdot_analytic;  // NaN when the plant truth is not linear
  bool operator==(const LogRow&) const = default;
};

inline constexpr const char* kLogColumns[] = {
    "t",     "r",     "x",     "y",       "x_m",      "x_hat",
    "e1",    "e2_innov", "e2_true", "P",  "L",        "k_hat",
    "l_hat", "w_hat", "theta", "u",       "V",        "Vdot_analytic"};

struct TimeSeriesLog {
  std::vector<LogRow> rows;
  /// V and Vdot_analytic are only defined for a linear plant.
  bool has_lyapunov = false;

  [[nodiscard]] std::vector<double> column(double LogRow::*field) const;
};

/// Value of the latest schedule entry with start_time <= t.
double reference_signal(double t, const std::vector<ScheduleEntry>& schedule);

/// Zero-mean Gaussian with variance Q dt.
double gaussian_increment(NoiseStream& rng, double variance, double dt);

struct SegmentMetrics {
  double start_time;
  double level;
  std::size_t samples;
  double rms_tracking_error;
  bool operator==(const SegmentMetrics&) const = default;
};

struct RunMetrics {
  double rms_tracking_error = 0.0;     // y vs x_m
  double rms_estimation_error = 0.0;   // x_hat vs x
  double rms_measurement_error = 0.0;  // y vs x
  std::vector<SegmentMetrics> segments;
  double drift_window_start = 0.0;
  double param_drift_rate = 0.0;  // slope of |k_hat| + |l_hat|
  AdaptedParams final_params;
  bool diverged = false;
  double gain_bound = 0.0;  // designer-facing L_max
  std::optional<double> gain_bound_true_plant;
  bool gain_bound_pass = false;
  std::optional<double> gain_bound_violation_time;
  bool covariance_monotone = false;

  bool operator==(const RunMetrics&) const = default;
};

/// Designer-facing L_max: lmax_lemma for the unblended law, lmax_theorem
/// with alpha and a_max otherwise.
double designer_gain_bound(const ScenarioConfig& cfg);

/// Pure function of the log and the config.
RunMetrics compute_metrics(const TimeSeriesLog& log, const ScenarioConfig& cfg);

/// Open-loop control injected in place of the adaptive law: u(t, x, r).
using ControlOverride = std::function<double(double, double, double)>;

/// Steps one scenario. Owns the state and both noise streams.
class Simulator {
 public:
  /// Throws ConfigError if validate(cfg) reports problems.
  explicit Simulator(ScenarioConfig cfg);

  void set_control_override(ControlOverride u) { override_ = std::move(u); }
  /// Forces theta to a fixed value in blended mode.
  void force_theta(std::optional<double> theta) { forced_theta_ = theta; }

  const SimState& state() const { return state_; }
  double time() const { return static_cast<double>(step_index_) * cfg_.dt; }
  std::size_t step_index() const { return step_index_; }
  const ScenarioConfig& config() const { return cfg_; }

  /// Log row for the current sample. Draws the measurement noise for the
  /// current control period if it has not been drawn yet.
  LogRow sample();

  /// Advances one dt: sample r and y, compute theta and u, integrate with
  /// RK4, add the process-noise increment, clamp P >= 0. Throws
  /// DivergenceError if any state leaves the configured bound.
  void step();

 private:
  struct ControlEval {
    double y;
    double e2;
    double theta;
    double u;
  };

  ControlEval evaluate(const SimState& s, double t, double r) const;
  SimState derivative(const SimState& s, double t, double r,
                      const ControlEval* held) const;
  void refresh_measurement();
  void check_divergence() const;

  ScenarioConfig cfg_;
  LinearisedPlant truth_;
  std::optional<IdealGains> ideal_;
  LyapunovWeights weights_;
  BlendingParams blending_;
  SimState state_;
  std::size_t step_index_ = 0;
  NoiseStream measurement_rng_;
  NoiseStream process_rng_;
  double held_noise_ = 0.0;
  std::optional<std::size_t> noise_drawn_at_;
  std::optional<ControlEval> held_control_;
  ControlOverride override_;
  std::optional<double> forced_theta_;
};

struct RunResult {
  TimeSeriesLog log;
  RunMetrics metrics;
  std::optional<std::string> divergence;
};

/// Runs the scenario to completion. Divergence does not throw; the log is
/// truncated and metrics.diverged is set.
RunResult run_scenario(const ScenarioConfig& cfg);

}  // namespace kfmrac
