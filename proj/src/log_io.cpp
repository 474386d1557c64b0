#include "kfmrac/log_io.hpp"

#include <charconv>
#include <cstdio>
#include <cmath>
#include <istream>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace kfmrac {

namespace {

constexpr double LogRow::*kFields[] = {
    &LogRow::t,       &LogRow::r,        &LogRow::x,       &LogRow::y,
    &LogRow::x_m,     &LogRow::x_hat,    &LogRow::e1,      &LogRow::e2_innov,
    &LogRow::e2_true, &LogRow::P,        &LogRow::L,       &LogRow::k_hat,
    &LogRow::l_hat,   &LogRow::w_hat,    &LogRow::theta,   &LogRow::u,
    &LogRow::V,       &LogRow::Vdot_analytic};

static_assert(std::size(kFields) == std::size(kLogColumns));

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const TimeSeriesLog& log, std::ostream& out) {
  for (std::size_t i = 0; i < std::size(kLogColumns); ++i) {
    out << (i ? "," : "") << kLogColumns[i];
  }
  out << '\n';
  for (const auto& row : log.rows) {
    for (std::size_t i = 0; i < std::size(kFields); ++i) {
      if (i) out << ',';
      const double v = row.*kFields[i];
      if (!std::isnan(v)) out << format_double(v);
    }
    out << '\n';
  }
}

std::string to_csv(const TimeSeriesLog& log) {
  std::ostringstream os;
  write_csv(log, os);
  return os.str();
}

TimeSeriesLog read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("log: empty file");
  const auto header = split(line);
  if (header.size() != std::size(kLogColumns)) {
    throw std::runtime_error("log line 1: expected " +
                             std::to_string(std::size(kLogColumns)) +
                             " columns");
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kLogColumns[i]) {
      throw std::runtime_error("log line 1: column " + std::to_string(i + 1) +
                               " is '" + header[i] + "', expected '" +
                               kLogColumns[i] + "'");
    }
  }

  TimeSeriesLog log;
  log.has_lyapunov = true;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != std::size(kFields)) {
      throw std::runtime_error("log line " + std::to_string(line_no) +
                               ": wrong number of cells");
    }
    LogRow row{};
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!cells[i].empty()) {
        const char* first = cells[i].data();
        const char* last = first + cells[i].size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) {
          throw std::runtime_error("log line " + std::to_string(line_no) +
                                   ": cannot parse '" + cells[i] + "'");
        }
      } else if (kFields[i] != &LogRow::V && kFields[i] != &LogRow::Vdot_analytic) {
        throw std::runtime_error("log line " + std::to_string(line_no) +
                                 ": empty cell in column " + kLogColumns[i]);
      }
      row.*kFields[i] = v;
    }
    if (std::isnan(row.V)) log.has_lyapunov = false;
    log.rows.push_back(row);
  }
  if (log.rows.empty()) log.has_lyapunov = false;
  return log;
}

std::string metrics_to_json(const RunMetrics& m, const std::string& config_echo) {
  nlohmann::ordered_json j;
  j["rms_tracking_error"] = m.rms_tracking_error;
  j["rms_estimation_error"] = m.rms_estimation_error;
  j["rms_measurement_error"] = m.rms_measurement_error;
  j["drift_window_start"] = m.drift_window_start;
  j["param_drift_rate"] = m.param_drift_rate;
  j["final_k_hat"] = m.final_params.k_hat;
  j["final_l_hat"] = m.final_params.l_hat;
  j["final_w_hat"] = m.final_params.w_hat;
  j["diverged"] = m.diverged;
  j["gain_bound"] = m.gain_bound;
  j["gain_bound_true_plant"] =
      m.gain_bound_true_plant ? nlohmann::ordered_json(*m.gain_bound_true_plant)
                              : nlohmann::ordered_json(nullptr);
  j["gain_bound_pass"] = m.gain_bound_pass;
  j["gain_bound_violation_time"] =
      m.gain_bound_violation_time
          ? nlohmann::ordered_json(*m.gain_bound_violation_time)
          : nlohmann::ordered_json(nullptr);
  j["covariance_monotone"] = m.covariance_monotone;
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : m.segments) {
    segs.push_back({{"start_time", s.start_time},
                    {"level", s.level},
                    {"samples", s.samples},
                    {"rms_tracking_error", s.rms_tracking_error}});
  }
  j["segments"] = std::move(segs);
  j["config"] = config_echo;
  return j.dump(2) + "\n";
}

}  // namespace kfmrac
