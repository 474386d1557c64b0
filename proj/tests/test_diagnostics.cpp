#include <gtest/gtest.h>

#include "kfmrac/diagnostics.hpp"
#include "kfmrac/scenario.hpp"

namespace kfmrac {
namespace {

ScenarioConfig sustained(ScenarioConfig c) {
  c.schedule = noise_drift_schedule();
  c.measurement_noise = false;
  c.process_noise = false;
  return c;
}

CheckStatus status_of(const DiagnosticReport& r, const std::string& name) {
  const auto* c = r.find(name);
  EXPECT_NE(c, nullptr) << name;
  return c ? c->status : CheckStatus::Fail;
}

TEST(Diagnose, NoiselessUnblendedStablePlantPassesEverything) {
  auto c = sustained(preset("sim2"));
  c.plant = LinearPlantParams{-1.0, 1.0, 0.1};
  c.design.mode = ControllerMode::Unblended;
  c.design.sign_a = PoleSign::NonPositive;
  c.design.alpha = 0.0;
  const auto res = run_scenario(c);
  const auto rep = diagnose(res.log, c);
  EXPECT_TRUE(rep.passed());
  for (const char* n : {"run_complete", "finite_values", "gain_bound",
                        "covariance_monotone", "lyapunov_matrix_positive",
                        "lyapunov_nonincreasing", "error_convergence"}) {
    EXPECT_EQ(status_of(rep, n), CheckStatus::Pass) << n;
  }
  EXPECT_EQ(status_of(rep, "lyapunov_rate"), CheckStatus::Info);
}

TEST(Diagnose, NoiselessBlendedUnstablePlantPassesEverything) {
  const auto c = sustained(preset("sim2"));
  const auto rep = diagnose(run_scenario(c).log, c);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(status_of(rep, "error_convergence"), CheckStatus::Pass);
  EXPECT_EQ(status_of(rep, "lyapunov_matrix_positive"), CheckStatus::Pass);
}

TEST(Diagnose, NoisyRunSkipsPathwiseLyapunovClaims) {
  const auto c = preset("sim2");
  const auto rep = diagnose(run_scenario(c).log, c);
  EXPECT_EQ(status_of(rep, "lyapunov_nonincreasing"), CheckStatus::Skipped);
  EXPECT_EQ(status_of(rep, "error_convergence"), CheckStatus::Skipped);
  EXPECT_EQ(status_of(rep, "gain_bound"), CheckStatus::Pass);
}

TEST(Diagnose, StepInsideTailWindowSkipsConvergence) {
  auto c = preset("sim2");
  c.measurement_noise = c.process_noise = false;
  const auto rep = diagnose(run_scenario(c).log, c);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(status_of(rep, "error_convergence"), CheckStatus::Skipped);
  EXPECT_EQ(status_of(rep, "lyapunov_nonincreasing"), CheckStatus::Pass);
}

TEST(Diagnose, SurgePlantSkipsLyapunovChecks) {
  auto c = preset("sim1_blended");
  c.duration = 20.0;
  const auto rep = diagnose(run_scenario(c).log, c);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(status_of(rep, "lyapunov_matrix_positive"), CheckStatus::Skipped);
}

TEST(Diagnose, DetectsTruncatedLogAndGainViolation) {
  auto c = sustained(preset("sim2"));
  c.duration = 5.0;
  auto log = run_scenario(c).log;
  log.rows.pop_back();
  log.rows[10].L = 1e4;
  const auto rep = diagnose(log, c);
  EXPECT_FALSE(rep.passed());
  EXPECT_EQ(status_of(rep, "run_complete"), CheckStatus::Fail);
  EXPECT_EQ(status_of(rep, "gain_bound"), CheckStatus::Fail);
}

TEST(Diagnose, DetectsLyapunovIncrease) {
  auto c = sustained(preset("sim2"));
  c.duration = 5.0;
  auto log = run_scenario(c).log;
  log.rows[100].V += 1.0;
  EXPECT_EQ(status_of(diagnose(log, c), "lyapunov_nonincreasing"), CheckStatus::Fail);
}

TEST(Diagnostics, TailErrorAndLyapunovIncrease) {
  TimeSeriesLog log;
  for (int i = 0; i < 10; ++i) {
    LogRow r{};
    r.t = i;
    r.e1 = i == 9 ? 0.5 : 0.0;
    r.e2_true = i == 8 ? -0.7 : 0.0;
    r.V = 10.0 - i;
    log.rows.push_back(r);
  }
  EXPECT_EQ(tail_error(log, 0.1), 0.5);
  EXPECT_EQ(tail_error(log, 0.2), 0.7);
  EXPECT_EQ(max_lyapunov_increase(log), -1.0);
}

}  // namespace
}  // namespace kfmrac
