#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "kfmrac/log_io.hpp"
#include "kfmrac/scenario.hpp"

namespace kfmrac {
namespace {

ScenarioConfig short_preset(const std::string& name) {
  auto c = preset(name);
  c.duration = 30.0;
  return c;
}

TEST(FormatDouble, RoundTripsAndNormalisesNegativeZero) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(1.0), "1");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 8.329862e-4}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Csv, HeaderIsColumnListInOrder) {
  const std::string csv = to_csv(TimeSeriesLog{});
  EXPECT_EQ(csv,
            "t,r,x,y,x_m,x_hat,e1,e2_innov,e2_true,P,L,k_hat,l_hat,w_hat,"
            "theta,u,V,Vdot_analytic\n");
}

TEST(Csv, RoundTripIsBitExact) {
  auto c = short_preset("sim2");
  const auto res = run_scenario(c);
  std::istringstream in(to_csv(res.log));
  const auto back = read_csv(in);
  ASSERT_EQ(back.rows.size(), res.log.rows.size());
  EXPECT_TRUE(back.has_lyapunov);
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    ASSERT_EQ(back.rows[i], res.log.rows[i]) << "row " << i;
  }
}

TEST(Csv, NonlinearPlantWritesEmptyLyapunovCells) {
  auto c = short_preset("sim1_blended");
  c.duration = 0.05;
  const auto res = run_scenario(c);
  const std::string csv = to_csv(res.log);
  const auto second_line = csv.substr(csv.find('\n') + 1);
  EXPECT_EQ(second_line.substr(second_line.find('\n') - 2, 2), ",,");
  std::istringstream in(csv);
  const auto back = read_csv(in);
  EXPECT_FALSE(back.has_lyapunov);
  EXPECT_EQ(to_csv(back), csv);
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty), std::runtime_error);
  std::istringstream bad_header("t,r\n0,0\n");
  EXPECT_THROW(read_csv(bad_header), std::runtime_error);
  std::string csv = to_csv(TimeSeriesLog{});
  std::istringstream bad_cell(csv + "0,x,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n");
  try {
    read_csv(bad_cell);
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream missing(csv + "0,,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0\n");
  EXPECT_THROW(read_csv(missing), std::runtime_error);
}

TEST(Metrics, RecomputedFromSerializedLogMatchExactly) {
  for (const char* name : {"sim2", "sim1_unblended", "sim2_surge"}) {
    const auto c = short_preset(name);
    const auto res = run_scenario(c);
    std::istringstream in(to_csv(res.log));
    const auto back = read_csv(in);
    EXPECT_EQ(compute_metrics(back, c), res.metrics) << name;
  }
}

TEST(Metrics, JsonCarriesScalarsSegmentsAndConfig) {
  const auto c = short_preset("sim2");
  const auto res = run_scenario(c);
  const auto j = nlohmann::json::parse(metrics_to_json(res.metrics, to_config_text(c)));
  EXPECT_EQ(j.at("rms_tracking_error").get<double>(), res.metrics.rms_tracking_error);
  EXPECT_EQ(j.at("param_drift_rate").get<double>(), res.metrics.param_drift_rate);
  EXPECT_EQ(j.at("diverged").get<bool>(), false);
  EXPECT_EQ(j.at("segments").size(), res.metrics.segments.size());
  EXPECT_EQ(parse_scenario(j.at("config").get<std::string>()).name, "sim2");
}

TEST(Metrics, FiniteUnlessDiverged) {
  const auto res = run_scenario(short_preset("sim2"));
  const auto& m = res.metrics;
  ASSERT_FALSE(m.diverged);
  for (double v : {m.rms_tracking_error, m.rms_estimation_error,
                   m.rms_measurement_error, m.param_drift_rate, m.gain_bound,
                   m.final_params.k_hat, m.final_params.l_hat, m.final_params.w_hat}) {
    EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_TRUE(m.gain_bound_true_plant.has_value());
}

}  // namespace
}  // namespace kfmrac
