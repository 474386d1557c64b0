#include "kfmrac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kfmrac {

namespace {

constexpr std::uint64_t kMeasurementChannel = 1;
constexpr std::uint64_t kProcessChannel = 2;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SimState axpy(const SimState& s, double h, const SimState& d) {
  return {s.x + h * d.x,         s.x_m + h * d.x_m,
          s.x_hat + h * d.x_hat, s.P + h * d.P,
          s.k_hat + h * d.k_hat, s.l_hat + h * d.l_hat,
          s.w_hat + h * d.w_hat};
}

SimState rk4_combine(const SimState& s, double dt, const SimState& k1,
                     const SimState& k2, const SimState& k3,
                     const SimState& k4) {
  const auto mix = [dt](double v, double a, double b, double c, double d) {
    return v + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
  };
  return {mix(s.x, k1.x, k2.x, k3.x, k4.x),
          mix(s.x_m, k1.x_m, k2.x_m, k3.x_m, k4.x_m),
          mix(s.x_hat, k1.x_hat, k2.x_hat, k3.x_hat, k4.x_hat),
          mix(s.P, k1.P, k2.P, k3.P, k4.P),
          mix(s.k_hat, k1.k_hat, k2.k_hat, k3.k_hat, k4.k_hat),
          mix(s.l_hat, k1.l_hat, k2.l_hat, k3.l_hat, k4.l_hat),
          mix(s.w_hat, k1.w_hat, k2.w_hat, k3.w_hat, k4.w_hat)};
}

double rms(double sum_sq, std::size_t n) {
  return n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n));
}

// Least-squares slope of z against t.
double fit_slope(const std::vector<double>& t, const std::vector<double>& z) {
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  double t_mean = 0.0;
  double z_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t_mean += t[i];
    z_mean += z[i];
  }
  t_mean /= static_cast<double>(n);
  z_mean /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (t[i] - t_mean) * (z[i] - z_mean);
    sxx += (t[i] - t_mean) * (t[i] - t_mean);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

constexpr double kTimeEps = 1e-9;

}  // namespace

double DesignParams::resolved_alpha() const {
  return alpha.value_or(compute_alpha(sign_a, a_max, reference.a_m));
}

BlendingParams DesignParams::blending() const {
  if (mode == ControllerMode::Unblended) return {0.0, beta};
  return {resolved_alpha(), beta};
}

LyapunovWeights DesignParams::weights() const {
  return make_lyapunov_weights(m1, gains.m2, reference, delta.value_or(-1.0));
}

std::size_t ScenarioConfig::control_ratio() const {
  const double ratio = control_period.value_or(dt) / dt;
  return static_cast<std::size_t>(std::max(1LL, std::llround(ratio)));
}

std::size_t ScenarioConfig::step_count() const {
  const double n = duration / dt;
  const double nearest = std::round(n);
  if (std::abs(n - nearest) <= 1e-9 * std::max(1.0, n)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::floor(n));
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "invalid scenario (" << problems.size() << " problem"
           << (problems.size() == 1 ? "" : "s") << ")";
        for (const auto& p : problems) os << "\n  - " << p;
        return os.str();
      }()),
      problems_(std::move(problems)) {}

std::vector<std::string> validate(const ScenarioConfig& cfg) {
  std::vector<std::string> errs;
  const auto finite = [](double v) { return std::isfinite(v); };

  if (!(cfg.dt > 0.0) || !finite(cfg.dt)) errs.push_back("sim.dt must be > 0");
  if (!(cfg.duration >= cfg.dt) || !finite(cfg.duration)) {
    errs.push_back("sim.duration must be >= sim.dt");
  }
  if (cfg.control_period) {
    const double cp = *cfg.control_period;
    const double ratio = cfg.dt > 0.0 ? cp / cfg.dt : 0.0;
    if (!(cp >= cfg.dt) ||
        std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      errs.push_back("sim.control_period must be an integer multiple of sim.dt");
    }
  }
  if (!(cfg.divergence_threshold > 0.0)) {
    errs.push_back("sim.divergence_threshold must be > 0");
  }

  if (cfg.schedule.empty()) {
    errs.push_back("schedule is empty");
  } else {
    if (cfg.schedule.front().start_time != 0.0) {
      errs.push_back("schedule must start at t = 0");
    }
    for (std::size_t i = 1; i < cfg.schedule.size(); ++i) {
      if (!(cfg.schedule[i].start_time > cfg.schedule[i - 1].start_time)) {
        std::ostringstream os;
        os << "schedule times must be strictly increasing (entry " << i
           << " at t = " << cfg.schedule[i].start_time << ")";
        errs.push_back(os.str());
        break;
      }
    }
    for (const auto& e : cfg.schedule) {
      if (!finite(e.value) || !finite(e.start_time)) {
        errs.push_back("schedule contains a non-finite entry");
        break;
      }
    }
  }

  bool plant_ok = true;
  if (const auto* lin = std::get_if<LinearPlantParams>(&cfg.plant)) {
    if (lin->b == 0.0 || !finite(lin->b)) {
      errs.push_back("plant.b must be non-zero");
      plant_ok = false;
    }
    if (!finite(lin->a) || !finite(lin->w)) {
      errs.push_back("plant.a and plant.w must be finite");
      plant_ok = false;
    }
  } else {
    const auto& s = std::get<SurgePlantParams>(cfg.plant);
    if (!(s.m_total > 0.0)) {
      errs.push_back("plant.m_total must be > 0");
      plant_ok = false;
    }
    if (!(s.d_l >= 0.0)) errs.push_back("plant.d_l must be >= 0");
    if (!(s.d_q >= 0.0)) errs.push_back("plant.d_q must be >= 0");
  }

  const DesignParams& d = cfg.design;
  if (!(d.reference.a_m > 0.0)) errs.push_back("design.a_m must be > 0");
  if (!finite(d.reference.b_m)) errs.push_back("design.b_m must be finite");
  if (!(d.R > 0.0)) errs.push_back("design.R must be > 0");
  if (!(d.Q >= 0.0)) errs.push_back("design.Q must be >= 0");
  if (!(d.gains.gamma1 > 0.0 && d.gains.gamma2 > 0.0 && d.gains.gamma3 > 0.0)) {
    errs.push_back("design.gamma1..3 must all be > 0");
  }
  if (!(d.m1 > 0.0) || !(d.gains.m2 > 0.0)) {
    errs.push_back("design.m1 and design.m2 must be > 0");
  }
  if (d.gains.sign_b != 1.0 && d.gains.sign_b != -1.0) {
    errs.push_back("design.sign_b must be 1 or -1");
  } else if (plant_ok) {
    const double true_b = linearise(cfg.plant).b;
    if ((true_b > 0.0) != (d.gains.sign_b > 0.0)) {
      errs.push_back("design.sign_b does not match the sign of the plant's b");
    }
  }
  if (!(d.beta > 0.0)) errs.push_back("design.beta must be > 0");
  if (d.delta) {
    if (!(*d.delta > 0.0)) errs.push_back("design.delta must be > 0");
    if (!(d.reference.a_m * d.m1 - *d.delta > 0.0)) {
      errs.push_back("design.delta must be < a_m m1");
    }
  }

  bool sign_ok = true;
  if (d.sign_a == PoleSign::Positive && !(d.a_max > 0.0)) {
    errs.push_back("design.a_max must be > 0 when sign_a = 1");
    sign_ok = false;
  }
  if (plant_ok) {
    const double true_a = linearise(cfg.plant).a;
    const PoleSign actual = plant_pole_sign(cfg.plant);
    if (actual != d.sign_a) {
      std::ostringstream os;
      os << "design.sign_a = " << (d.sign_a == PoleSign::Positive ? 1 : -1)
         << " does not match the plant (a = " << true_a << ")";
      errs.push_back(os.str());
    } else if (actual == PoleSign::Positive && sign_ok && true_a > d.a_max) {
      std::ostringstream os;
      os << "plant a = " << true_a << " exceeds design.a_max = " << d.a_max;
      errs.push_back(os.str());
    }
  }

  if (d.alpha && d.reference.a_m > 0.0 && sign_ok) {
    const double a = *d.alpha;
    if (d.mode == ControllerMode::Blended) {
      const double ceiling = compute_alpha(d.sign_a, d.a_max, d.reference.a_m);
      if (!(a > 0.0)) {
        errs.push_back("design.alpha must be > 0 in blended mode");
      } else if (a > ceiling * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "design.alpha = " << a << " exceeds the admissible ceiling "
           << ceiling << " for the declared pole sign";
        errs.push_back(os.str());
      }
    } else if (!(a >= 0.0 && a <= 1.0)) {
      errs.push_back("design.alpha must lie in [0, 1]");
    }
  }

  if (cfg.initial.P && !(*cfg.initial.P >= 0.0)) {
    errs.push_back("sim.P0 must be >= 0");
  }
  for (double v : {cfg.initial.x, cfg.initial.x_m, cfg.initial.x_hat,
                   cfg.initial.k_hat, cfg.initial.l_hat, cfg.initial.w_hat}) {
    if (!finite(v)) {
      errs.push_back("initial conditions must be finite");
      break;
    }
  }
  return errs;
}

SimState initial_state(const ScenarioConfig& cfg) {
  return {cfg.initial.x,     cfg.initial.x_m,   cfg.initial.x_hat,
          cfg.initial_covariance(), cfg.initial.k_hat, cfg.initial.l_hat,
          cfg.initial.w_hat};
}

std::vector<double> TimeSeriesLog::column(double LogRow::*field) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.*field);
  return out;
}

double reference_signal(double t, const std::vector<ScheduleEntry>& schedule) {
  double value = schedule.empty() ? 0.0 : schedule.front().value;
  for (const auto& e : schedule) {
    if (e.start_time <= t + kTimeEps) {
      value = e.value;
    } else {
      break;
    }
  }
  return value;
}

double gaussian_increment(NoiseStream& rng, double variance, double dt) {
  if (variance == 0.0) return 0.0;
  return std::sqrt(variance * dt) * rng.standard_normal();
}

Simulator::Simulator(ScenarioConfig cfg)
    : cfg_(std::move(cfg)),
      measurement_rng_(cfg_.seed, kMeasurementChannel),
      process_rng_(cfg_.seed, kProcessChannel) {
  if (auto errs = validate(cfg_); !errs.empty()) {
    throw ConfigError(std::move(errs));
  }
  truth_ = linearise(cfg_.plant);
  if (const auto* lin = std::get_if<LinearPlantParams>(&cfg_.plant)) {
    ideal_ = ideal_gains(*lin, cfg_.design.reference);
  }
  weights_ = cfg_.design.weights();
  blending_ = cfg_.design.blending();
  state_ = initial_state(cfg_);
}

void Simulator::refresh_measurement() {
  const std::size_t period = step_index_ / cfg_.control_ratio();
  if (noise_drawn_at_ && *noise_drawn_at_ == period) return;
  noise_drawn_at_ = period;
  held_noise_ = 0.0;
  if (cfg_.measurement_noise && cfg_.design.R > 0.0) {
    held_noise_ = measure(0.0, measurement_rng_, cfg_.design.R);
  }
  if (cfg_.hold == ControlHold::ZeroOrderHold) {
    const double t = time();
    held_control_ = evaluate(state_, t, reference_signal(t, cfg_.schedule));
  }
}

Simulator::ControlEval Simulator::evaluate(const SimState& s, double t,
                                           double r) const {
  ControlEval ce{};
  ce.y = s.x + held_noise_;
  ce.e2 = ce.y - s.x_hat;
  const bool blended = cfg_.design.mode == ControllerMode::Blended;
  if (blended) {
    ce.theta = forced_theta_ ? *forced_theta_ : blending_theta(ce.e2, blending_);
  } else {
    ce.theta = 0.0;
  }
  const AdaptedParams ap{s.k_hat, s.l_hat, s.w_hat};
  if (override_) {
    ce.u = override_(t, s.x, r);
  } else if (blended) {
    ce.u = control_blended(ap, ce.y, s.x_hat, ce.theta, r);
  } else {
    ce.u = control_unblended(ap, ce.y, r);
  }
  return ce;
}

SimState Simulator::derivative(const SimState& s, double t, double r,
                               const ControlEval* held) const {
  ControlEval ce{};
  if (held != nullptr) {
    ce = *held;
    ce.e2 = ce.y - s.x_hat;
  } else {
    ce = evaluate(s, t, r);
  }
  const DesignParams& d = cfg_.design;
  const double L = kalman_gain(s.P, d.R);
  const AdaptationRates rates =
      d.mode == ControllerMode::Blended
          ? adapt_derivs_blended(ce.y, s.x_hat, ce.theta, r, ce.e2, d.gains)
          : adapt_derivs_unblended(ce.y, r, ce.e2, d.gains);
  return {plant_deriv(s.x, ce.u, cfg_.plant),
          reference_deriv(s.x_m, r, d.reference),
          observer_deriv(s.x_hat, r, ce.y, L, d.reference),
          riccati_deriv(s.P, d.reference, d.Q, d.R),
          rates.dk_hat,
          rates.dl_hat,
          rates.dw_hat};
}

LogRow Simulator::sample() {
  refresh_measurement();
  const double t = time();
  const double r = reference_signal(t, cfg_.schedule);
  const ControlEval ce =
      held_control_ && cfg_.hold == ControlHold::ZeroOrderHold
          ? ControlEval{held_control_->y, held_control_->y - state_.x_hat,
                        held_control_->theta, held_control_->u}
          : evaluate(state_, t, r);
  const SimState& s = state_;
  const double L = kalman_gain(s.P, cfg_.design.R);

  LogRow row{};
  row.t = t;
  row.r = r;
  row.x = s.x;
  row.y = ce.y;
  row.x_m = s.x_m;
  row.x_hat = s.x_hat;
  row.e1 = s.x_hat - s.x_m;
  row.e2_innov = ce.e2;
  row.e2_true = s.x - s.x_hat;
  row.P = s.P;
  row.L = L;
  row.k_hat = s.k_hat;
  row.l_hat = s.l_hat;
  row.w_hat = s.w_hat;
  row.theta = ce.theta;
  row.u = ce.u;
  row.V = kNaN;
  row.Vdot_analytic = kNaN;
  if (ideal_) {
    const auto& lin = std::get<LinearPlantParams>(cfg_.plant);
    const ErrorState es{row.e1, row.e2_true, s.k_hat - ideal_->k_star,
                        s.l_hat - ideal_->l_star, s.w_hat - lin.w};
    row.V = lyapunov_value(es, weights_, cfg_.design.gains, std::abs(lin.b));
    const Sym2 U = cfg_.design.mode == ControllerMode::Blended
                       ? u2_matrix(L, ce.theta, lin.a, cfg_.design.reference,
                                   weights_)
                       : u_matrix_lemma(L, cfg_.design.reference, weights_);
    row.Vdot_analytic = -U.quadratic_form(row.e1, row.e2_true);
  }
  return row;
}

void Simulator::step() {
  refresh_measurement();
  const double t = time();
  const double dt = cfg_.dt;
  const double r = reference_signal(t, cfg_.schedule);
  const ControlEval* held =
      cfg_.hold == ControlHold::ZeroOrderHold && held_control_
          ? &*held_control_
          : nullptr;

  const SimState k1 = derivative(state_, t, r, held);
  const SimState k2 = derivative(axpy(state_, 0.5 * dt, k1), t + 0.5 * dt, r, held);
  const SimState k3 = derivative(axpy(state_, 0.5 * dt, k2), t + 0.5 * dt, r, held);
  const SimState k4 = derivative(axpy(state_, dt, k3), t + dt, r, held);
  state_ = rk4_combine(state_, dt, k1, k2, k3, k4);

  if (cfg_.process_noise) {
    state_.x += gaussian_increment(process_rng_, cfg_.design.Q, dt);
  }
  state_.P = std::max(0.0, state_.P);
  ++step_index_;
  check_divergence();
}

void Simulator::check_divergence() const {
  const double limit = cfg_.divergence_threshold;
  const SimState& s = state_;
  const double values[] = {s.x, s.x_m, s.x_hat, s.P, s.k_hat, s.l_hat, s.w_hat};
  const char* names[] = {"x", "x_m", "x_hat", "P", "k_hat", "l_hat", "w_hat"};
  for (std::size_t i = 0; i < std::size(values); ++i) {
    if (!std::isfinite(values[i]) || std::abs(values[i]) > limit) {
      std::ostringstream os;
      os << "divergence at t = " << time() << ": |" << names[i]
         << "| = " << std::abs(values[i]) << " exceeds " << limit;
      throw DivergenceError(time(), os.str());
    }
  }
}

double designer_gain_bound(const ScenarioConfig& cfg) {
  const DesignParams& d = cfg.design;
  const LyapunovWeights w = d.weights();
  if (d.mode == ControllerMode::Unblended) return lmax_lemma(w);
  const double a_bound = d.sign_a == PoleSign::Positive ? d.a_max : 0.0;
  return lmax_theorem(d.resolved_alpha(), a_bound, d.reference, w);
}

RunMetrics compute_metrics(const TimeSeriesLog& log, const ScenarioConfig& cfg) {
  RunMetrics m;
  const auto& rows = log.rows;
  m.diverged = rows.size() < cfg.step_count() + 1;
  if (rows.empty()) return m;

  double track_sq = 0.0;
  double est_sq = 0.0;
  double meas_sq = 0.0;
  for (const auto& r : rows) {
    track_sq += (r.y - r.x_m) * (r.y - r.x_m);
    est_sq += (r.x_hat - r.x) * (r.x_hat - r.x);
    meas_sq += (r.y - r.x) * (r.y - r.x);
  }
  m.rms_tracking_error = rms(track_sq, rows.size());
  m.rms_estimation_error = rms(est_sq, rows.size());
  m.rms_measurement_error = rms(meas_sq, rows.size());

  const double t_end = rows.back().t;
  double last_start = 0.0;
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    const double start = cfg.schedule[i].start_time;
    const double stop = i + 1 < cfg.schedule.size()
                            ? cfg.schedule[i + 1].start_time
                            : std::numeric_limits<double>::infinity();
    if (start > t_end + kTimeEps) break;
    last_start = start;
    double sq = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.t >= start - kTimeEps && r.t < stop - kTimeEps) {
        sq += (r.y - r.x_m) * (r.y - r.x_m);
        ++n;
      }
    }
    if (n > 0) {
      m.segments.push_back({start, cfg.schedule[i].value, n, rms(sq, n)});
    }
  }

  m.drift_window_start = std::max(last_start, 0.5 * t_end);
  std::vector<double> ts;
  std::vector<double> zs;
  for (const auto& r : rows) {
    if (r.t >= m.drift_window_start - kTimeEps) {
      ts.push_back(r.t);
      zs.push_back(std::abs(r.k_hat) + std::abs(r.l_hat));
    }
  }
  m.param_drift_rate = fit_slope(ts, zs);
  m.final_params = {rows.back().k_hat, rows.back().l_hat, rows.back().w_hat};

  m.gain_bound = designer_gain_bound(cfg);
  const DesignParams& d = cfg.design;
  if (d.mode == ControllerMode::Unblended) {
    m.gain_bound_true_plant = m.gain_bound;
  } else {
    try {
      m.gain_bound_true_plant =
          lmax_theorem(d.resolved_alpha(), linearise(cfg.plant).a, d.reference,
                       d.weights());
    } catch (const std::invalid_argument&) {
      m.gain_bound_true_plant.reset();
    }
  }
  const auto t = log.column(&LogRow::t);
  const auto L = log.column(&LogRow::L);
  const auto P = log.column(&LogRow::P);
  const GainVerdict v = check_gain_trajectory(t, L, P, m.gain_bound);
  m.gain_bound_pass = v.pass;
  m.gain_bound_violation_time = v.first_violation_time;
  m.covariance_monotone = v.covariance_monotone;
  return m;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  Simulator sim(cfg);
  RunResult result;
  result.log.has_lyapunov = std::holds_alternative<LinearPlantParams>(cfg.plant);
  const std::size_t steps = cfg.step_count();
  result.log.rows.reserve(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    result.log.rows.push_back(sim.sample());
    if (n == steps) break;
    try {
      sim.step();
    } catch (const DivergenceError& e) {
      result.divergence = e.what();
      break;
    }
  }
  result.metrics = compute_metrics(result.log, cfg);
  return result;
}

}  // namespace kfmrac
