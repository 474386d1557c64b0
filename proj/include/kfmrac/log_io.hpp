// CSV logs and flat key-value metrics.
//
// Values are written with 17 significant digits so a log read back yields
// bit-identical doubles. Columns that are undefined for a run (V and
// Vdot_analytic on a nonlinear plant) are written as empty cells.
#pragma once

#include <iosfwd>
#include <string>

#include "kfmrac/sim.hpp"

namespace kfmrac {

void write_csv(const TimeSeriesLog& log, std::ostream& out);
std::string to_csv(const TimeSeriesLog& log);

/// Throws std::runtime_error on a malformed header or row, naming the line.
TimeSeriesLog read_csv(std::istream& in);

/// Flat JSON object: scalar values plus one array of per-segment records.
std::string metrics_to_json(const RunMetrics& m, const std::string& config_echo);

/// 17-significant-digit text for a double; negative zero prints as "0".
std::string format_double(double v);

}  // namespace kfmrac
