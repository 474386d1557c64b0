// Scenario files: parsing, echo-back and the built-in presets.
//
// The format is line-oriented key/value text with four sections:
//
//   name = sim2
//   [plant]      model = linear | surge, then a, b, w or m_total, d_l, d_q
//   [design]     mode, a_m, b_m, Q, R, gamma1..3, m1, m2, alpha, beta,
//                sign_a, a_max, sign_b, delta
//   [schedule]   one "start_time = value" line per reference step
//   [sim]        dt, duration, control_period, control_hold, seed,
//                measurement_noise, process_noise, divergence_threshold,
//                x0, x_m0, x_hat0, P0, k_hat0, l_hat0, w_hat0
//
// '#' starts a comment. Numbers may be written as fractions ("10/11").
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kfmrac/sim.hpp"

namespace kfmrac {

/// Parses and validates. Throws ConfigError listing every syntax problem
/// (with "<source>:<line>:" context) or, if the text parses, every violated
/// invariant.
ScenarioConfig parse_scenario(std::string_view text,
                              std::string_view source = "<config>");

/// Throws std::runtime_error if the file cannot be read. Without a `name`
/// key the file stem names the scenario.
ScenarioConfig parse_scenario_file(const std::filesystem::path& path);

/// Fully-resolved text form: every default is written out explicitly and
/// parse_scenario(to_config_text(c)) reproduces c.
std::string to_config_text(const ScenarioConfig& cfg);

/// Built-in scenarios. Throws std::invalid_argument for an unknown name.
ScenarioConfig preset(std::string_view name);
const std::vector<std::string>& preset_names();

/// Piecewise-constant references used by the presets.
std::vector<ScheduleEntry> noise_drift_schedule();   // 0 / 0.2, then 0.2 held
std::vector<ScheduleEntry> three_level_schedule();   // 0 / 0.2 / 0.3 cycling

}  // namespace kfmrac
