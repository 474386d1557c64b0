#include "cli_app.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kfmrac/diagnostics.hpp"
#include "kfmrac/log_io.hpp"
#include "kfmrac/scenario.hpp"

namespace kfmrac::cli {

namespace fs = std::filesystem;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> dt;
  bool no_noise = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--seed", seed, "RNG seed");
    cmd.add_option("--duration", duration, "Run length in seconds");
    cmd.add_option("--dt", dt, "Integration step in seconds");
    cmd.add_flag("--no-noise", no_noise,
                 "Disable measurement and process noise");
  }

  void apply(ScenarioConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (duration) cfg.duration = *duration;
    if (dt) cfg.dt = *dt;
    if (no_noise) {
      cfg.measurement_noise = false;
      cfg.process_noise = false;
    }
  }
};

/// Loads a preset or a file, applies overrides and validates the result.
ScenarioConfig load(const std::optional<std::string>& preset_name,
                    const std::optional<std::string>& config_path,
                    const Overrides& ov) {
  ScenarioConfig cfg;
  if (preset_name) {
    try {
      cfg = preset(*preset_name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError({e.what()});
    }
  } else if (config_path) {
    if (!fs::exists(*config_path)) {
      throw IoError("cannot read config '" + *config_path + "'");
    }
    cfg = parse_scenario_file(*config_path);
  } else {
    throw ConfigError({"one of --preset or --config is required"});
  }
  ov.apply(cfg);
  if (auto problems = validate(cfg); !problems.empty()) {
    throw ConfigError(std::move(problems));
  }
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << content;
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

std::string report_text(const DiagnosticReport& rep) {
  std::ostringstream os;
  for (const auto& c : rep.checks) {
    os << to_string(c.status) << "  " << c.name << "  " << c.detail << "\n";
  }
  os << (rep.passed() ? "verdict: PASS\n" : "verdict: FAIL\n");
  return os.str();
}

std::string summary_line(const ScenarioConfig& cfg, const RunMetrics& m) {
  std::ostringstream os;
  os.precision(6);
  os << cfg.name << ": rms_tracking=" << m.rms_tracking_error
     << " rms_estimation=" << m.rms_estimation_error
     << " rms_measurement=" << m.rms_measurement_error
     << " drift_rate=" << m.param_drift_rate
     << " L_max=" << m.gain_bound
     << " gain_bound=" << (m.gain_bound_pass ? "pass" : "FAIL")
     << (m.diverged ? " DIVERGED" : "");
  return os.str();
}

/// Artifacts of one completed run, held in memory until written.
struct Artifacts {
  std::string name;
  std::string csv;
  std::string metrics;
  std::string config;
  std::optional<std::string> diagnostics;
};

Artifacts make_artifacts(const ScenarioConfig& cfg, const RunResult& res,
                         const std::optional<DiagnosticReport>& rep) {
  Artifacts a;
  a.name = cfg.name;
  a.config = to_config_text(cfg);
  a.csv = to_csv(res.log);
  a.metrics = metrics_to_json(res.metrics, a.config);
  if (rep) a.diagnostics = report_text(*rep);
  return a;
}

void write_artifacts(const fs::path& dir, const Artifacts& a) {
  write_file(dir / (a.name + "_log.csv"), a.csv);
  write_file(dir / (a.name + "_metrics.json"), a.metrics);
  write_file(dir / (a.name + "_config.ini"), a.config);
  if (a.diagnostics) {
    write_file(dir / (a.name + "_diagnostics.txt"), *a.diagnostics);
  }
}

double drift_ratio(double first, double second) {
  if (first == second) return 1.0;
  return first / std::abs(second);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Observer-based adaptive control simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run one scenario and write its artifacts");
  std::optional<std::string> run_preset;
  std::optional<std::string> run_config;
  std::string run_out = ".";
  bool run_diagnose = false;
  Overrides run_ov;
  auto* rp = run->add_option("--preset", run_preset, "Built-in scenario name");
  auto* rc = run->add_option("--config", run_config, "Scenario file");
  rp->excludes(rc);
  run->add_option("--out", run_out, "Output directory");
  run->add_flag("--diagnose", run_diagnose, "Also emit stability verdicts");
  run_ov.add_to(*run);

  // compare
  auto* cmp = app.add_subcommand(
      "compare", "Run two scenarios with the same seed and compare drift");
  bool cmp_sim1 = false;
  std::vector<std::string> cmp_presets;
  std::vector<std::string> cmp_configs;
  std::optional<std::string> cmp_out;
  Overrides cmp_ov;
  cmp->add_flag("--sim1", cmp_sim1, "Built-in unblended vs blended pair");
  cmp->add_option("--preset", cmp_presets, "Preset name (repeatable)");
  cmp->add_option("--config", cmp_configs, "Scenario file (repeatable)");
  cmp->add_option("--out", cmp_out, "Write both runs' artifacts here");
  cmp_ov.add_to(*cmp);

  // diagnose
  auto* dia = app.add_subcommand("diagnose", "Stability verdicts for a log");
  std::string dia_log;
  std::optional<std::string> dia_preset;
  std::optional<std::string> dia_config;
  Overrides dia_ov;
  dia->add_option("--log", dia_log, "CSV log produced by run")->required();
  auto* dp = dia->add_option("--preset", dia_preset, "Scenario that produced the log");
  auto* dc = dia->add_option("--config", dia_config, "Scenario file that produced the log");
  dp->excludes(dc);
  dia_ov.add_to(*dia);

  // presets
  auto* pre = app.add_subcommand("presets", "List or write the built-in scenarios");
  std::optional<std::string> pre_out;
  pre->add_option("--out", pre_out, "Write <name>.ini files here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (run->parsed()) {
      const ScenarioConfig cfg = load(run_preset, run_config, run_ov);
      const fs::path dir = run_out;
      ensure_dir(dir);
      const RunResult res = run_scenario(cfg);
      std::optional<DiagnosticReport> rep;
      if (run_diagnose) rep = diagnose(res.log, cfg);
      write_artifacts(dir, make_artifacts(cfg, res, rep));
      out << summary_line(cfg, res.metrics) << "\n";
      if (rep) out << report_text(*rep);
      if (res.divergence) {
        err << "diverged: " << *res.divergence << "\n";
        return kDivergence;
      }
      return rep && !rep->passed() ? kDivergence : kOk;
    }

    if (cmp->parsed()) {
      std::vector<ScenarioConfig> cfgs;
      std::vector<std::string> problems;
      const auto collect = [&](auto&& make) {
        try {
          cfgs.push_back(make());
        } catch (const ConfigError& e) {
          problems.insert(problems.end(), e.problems().begin(), e.problems().end());
        }
      };
      if (cmp_sim1) {
        for (const char* n : {"sim1_unblended", "sim1_blended"}) {
          collect([&] { return load(std::string(n), std::nullopt, cmp_ov); });
        }
      }
      for (const auto& p : cmp_presets) {
        collect([&] { return load(p, std::nullopt, cmp_ov); });
      }
      for (const auto& c : cmp_configs) {
        collect([&] { return load(std::nullopt, c, cmp_ov); });
      }
      if (problems.empty() && cfgs.size() != 2) {
        problems.push_back("compare needs exactly two scenarios (got " +
                           std::to_string(cfgs.size()) + ")");
      }
      if (!problems.empty()) throw ConfigError(std::move(problems));
      // Same seed for both: the second run adopts the first's seed.
      cfgs[1].seed = cfgs[0].seed;
      if (cfgs[0].name == cfgs[1].name) cfgs[1].name += "_b";
      if (cmp_out) ensure_dir(*cmp_out);

      auto fa = std::async(std::launch::async, run_scenario, cfgs[0]);
      auto fb = std::async(std::launch::async, run_scenario, cfgs[1]);
      const RunResult ra = fa.get();
      const RunResult rb = fb.get();

      if (cmp_out) {
        write_artifacts(*cmp_out, make_artifacts(cfgs[0], ra, std::nullopt));
        write_artifacts(*cmp_out, make_artifacts(cfgs[1], rb, std::nullopt));
      }
      out << summary_line(cfgs[0], ra.metrics) << "\n"
          << summary_line(cfgs[1], rb.metrics) << "\n";
      std::ostringstream os;
      os.precision(6);
      os << "drift_ratio (" << cfgs[0].name << " / " << cfgs[1].name
         << ") = "
         << drift_ratio(ra.metrics.param_drift_rate, rb.metrics.param_drift_rate);
      out << os.str() << "\n";
      return ra.divergence || rb.divergence ? kDivergence : kOk;
    }

    if (dia->parsed()) {
      const ScenarioConfig cfg = load(dia_preset, dia_config, dia_ov);
      std::ifstream in(dia_log);
      if (!in) throw IoError("cannot read log '" + dia_log + "'");
      TimeSeriesLog log;
      try {
        log = read_csv(in);
      } catch (const std::runtime_error& e) {
        throw IoError(dia_log + ": " + e.what());
      }
      const DiagnosticReport rep = diagnose(log, cfg);
      out << report_text(rep);
      return rep.passed() ? kOk : kDivergence;
    }

    if (pre->parsed()) {
      if (!pre_out) {
        for (const auto& n : preset_names()) out << n << "\n";
        return kOk;
      }
      ensure_dir(*pre_out);
      for (const auto& n : preset_names()) {
        const fs::path p = fs::path(*pre_out) / (n + ".ini");
        write_file(p, to_config_text(preset(n)));
        out << p.string() << "\n";
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) err << "config error: " << p << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::runtime_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  }
  return kValidation;
}

}  // namespace kfmrac::cli
