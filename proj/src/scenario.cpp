#include "kfmrac/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "kfmrac/log_io.hpp"

namespace kfmrac {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_plain(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = first + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return v;
}

// Accepts plain numbers and simple fractions such as "10/11".
std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto num = parse_plain(trim(s.substr(0, slash)));
    const auto den = parse_plain(trim(s.substr(slash + 1)));
    if (!num || !den || *den == 0.0) return std::nullopt;
    return *num / *den;
  }
  return parse_plain(s);
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "off" || s == "0" || s == "no") return false;
  return std::nullopt;
}

struct Entry {
  std::string value;
  std::size_t line;
};

// Section -> ordered entries (schedule keeps order and duplicates matter).
struct RawConfig {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::vector<std::pair<std::string, Entry>> schedule;
};

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"", {"name"}},
      {"plant", {"model", "a", "b", "w", "m_total", "d_l", "d_q"}},
      {"design",
       {"mode", "a_m", "b_m", "Q", "R", "gamma1", "gamma2", "gamma3", "m1",
        "m2", "alpha", "beta", "sign_a", "a_max", "sign_b", "delta"}},
      {"sim",
       {"dt", "duration", "control_period", "control_hold", "seed",
        "measurement_noise", "process_noise", "divergence_threshold", "x0",
        "x_m0", "x_hat0", "P0", "k_hat0", "l_hat0", "w_hat0"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const RawConfig& raw, std::string source,
         std::vector<std::string>& errors)
      : raw_(raw), source_(std::move(source)), errors_(errors) {}

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto s = raw_.sections.find(section);
    if (s == raw_.sections.end()) return nullptr;
    const auto e = s->second.find(key);
    return e == s->second.end() ? nullptr : &e->second;
  }

  void number(const std::string& section, const std::string& key,
              double& out) {
    if (const Entry* e = find(section, key)) {
      if (auto v = parse_number(e->value)) {
        out = *v;
      } else {
        error(*e, key + ": '" + e->value + "' is not a number");
      }
    }
  }

  void number(const std::string& section, const std::string& key,
              std::optional<double>& out) {
    if (find(section, key) == nullptr) return;
    double v = 0.0;
    const auto before = errors_.size();
    number(section, key, v);
    if (errors_.size() == before) out = v;
  }

  void flag(const std::string& section, const std::string& key, bool& out) {
    if (const Entry* e = find(section, key)) {
      if (auto v = parse_bool(e->value)) {
        out = *v;
      } else {
        error(*e, key + ": '" + e->value + "' is not true/false");
      }
    }
  }

  void error(const Entry& e, const std::string& msg) {
    errors_.push_back(source_ + ":" + std::to_string(e.line) + ": " + msg);
  }

 private:
  const RawConfig& raw_;
  std::string source_;
  std::vector<std::string>& errors_;
};

RawConfig tokenize(std::string_view text, const std::string& source,
                   std::vector<std::string>& errors) {
  RawConfig raw;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  const auto err = [&](const std::string& msg) {
    errors.push_back(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) {
      sv = sv.substr(0, hash);
    }
    sv = trim(sv);
    if (sv.empty()) continue;
    if (sv.front() == '[') {
      if (sv.back() != ']') {
        err("unterminated section header");
        continue;
      }
      section = std::string(trim(sv.substr(1, sv.size() - 2)));
      if (section != "schedule" && !known_keys().contains(section)) {
        err("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      err("expected 'key = value'");
      continue;
    }
    const std::string key(trim(sv.substr(0, eq)));
    const std::string value(trim(sv.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      err("expected 'key = value'");
      continue;
    }
    if (section == "schedule") {
      raw.schedule.push_back({key, {value, line_no}});
      continue;
    }
    const auto known = known_keys().find(section);
    if (known == known_keys().end()) continue;  // already reported
    if (std::find(known->second.begin(), known->second.end(), key) ==
        known->second.end()) {
      err("unknown key '" + key + "'" +
          (section.empty() ? "" : " in [" + section + "]"));
      continue;
    }
    auto& entries = raw.sections[section];
    if (entries.contains(key)) {
      err("duplicate key '" + key + "'");
      continue;
    }
    entries[key] = {value, line_no};
  }
  return raw;
}

std::string sign_text(double s) { return s < 0.0 ? "-1" : "1"; }

}  // namespace

namespace {

ScenarioConfig parse_impl(std::string_view text, std::string_view source,
                          bool& named) {
  std::vector<std::string> errors;
  const std::string src(source);
  const RawConfig raw = tokenize(text, src, errors);
  Reader rd(raw, src, errors);

  ScenarioConfig cfg;
  named = false;
  if (const Entry* e = rd.find("", "name")) {
    cfg.name = e->value;
    named = true;
  }

  // [plant]
  std::string model = "linear";
  if (const Entry* e = rd.find("plant", "model")) model = e->value;
  if (model == "linear") {
    LinearPlantParams p;
    rd.number("plant", "a", p.a);
    rd.number("plant", "b", p.b);
    rd.number("plant", "w", p.w);
    cfg.plant = p;
    for (const char* k : {"m_total", "d_l", "d_q"}) {
      if (const Entry* e = rd.find("plant", k)) {
        rd.error(*e, std::string(k) + " does not apply to model = linear");
      }
    }
  } else if (model == "surge") {
    SurgePlantParams p;
    rd.number("plant", "m_total", p.m_total);
    rd.number("plant", "d_l", p.d_l);
    rd.number("plant", "d_q", p.d_q);
    cfg.plant = p;
    for (const char* k : {"a", "b", "w"}) {
      if (const Entry* e = rd.find("plant", k)) {
        rd.error(*e, std::string(k) + " does not apply to model = surge");
      }
    }
  } else {
    rd.error(*rd.find("plant", "model"),
             "model: '" + model + "' is not one of linear, surge");
  }

  // [design]
  DesignParams& d = cfg.design;
  if (const Entry* e = rd.find("design", "mode")) {
    if (e->value == "blended") {
      d.mode = ControllerMode::Blended;
    } else if (e->value == "unblended") {
      d.mode = ControllerMode::Unblended;
    } else {
      rd.error(*e, "mode: '" + e->value + "' is not one of blended, unblended");
    }
  }
  rd.number("design", "a_m", d.reference.a_m);
  rd.number("design", "b_m", d.reference.b_m);
  rd.number("design", "Q", d.Q);
  rd.number("design", "R", d.R);
  rd.number("design", "gamma1", d.gains.gamma1);
  rd.number("design", "gamma2", d.gains.gamma2);
  rd.number("design", "gamma3", d.gains.gamma3);
  rd.number("design", "m1", d.m1);
  rd.number("design", "m2", d.gains.m2);
  rd.number("design", "alpha", d.alpha);
  rd.number("design", "beta", d.beta);
  rd.number("design", "a_max", d.a_max);
  rd.number("design", "sign_b", d.gains.sign_b);
  rd.number("design", "delta", d.delta);
  if (const Entry* e = rd.find("design", "sign_a")) {
    const auto v = parse_number(e->value);
    if (v && *v == 1.0) {
      d.sign_a = PoleSign::Positive;
    } else if (v && *v == -1.0) {
      d.sign_a = PoleSign::NonPositive;
    } else {
      rd.error(*e, "sign_a: must be 1 (a > 0) or -1 (a <= 0)");
    }
  }

  // [schedule]
  for (const auto& [key, entry] : raw.schedule) {
    const auto t = parse_number(key);
    const auto v = parse_number(entry.value);
    if (!t || !v) {
      rd.error(entry, "schedule entries must be '<start_time> = <value>'");
      continue;
    }
    cfg.schedule.push_back({*t, *v});
  }

  // [sim]
  rd.number("sim", "dt", cfg.dt);
  rd.number("sim", "duration", cfg.duration);
  rd.number("sim", "control_period", cfg.control_period);
  rd.number("sim", "divergence_threshold", cfg.divergence_threshold);
  rd.flag("sim", "measurement_noise", cfg.measurement_noise);
  rd.flag("sim", "process_noise", cfg.process_noise);
  if (const Entry* e = rd.find("sim", "control_hold")) {
    if (e->value == "continuous") {
      cfg.hold = ControlHold::Continuous;
    } else if (e->value == "zoh") {
      cfg.hold = ControlHold::ZeroOrderHold;
    } else {
      rd.error(*e, "control_hold: '" + e->value + "' is not one of continuous, zoh");
    }
  }
  if (const Entry* e = rd.find("sim", "seed")) {
    std::uint64_t seed = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    auto [ptr, ec] = std::from_chars(first, last, seed);
    if (ec != std::errc{} || ptr != last) {
      rd.error(*e, "seed: '" + e->value + "' is not an unsigned integer");
    } else {
      cfg.seed = seed;
    }
  }
  rd.number("sim", "x0", cfg.initial.x);
  rd.number("sim", "x_m0", cfg.initial.x_m);
  rd.number("sim", "x_hat0", cfg.initial.x_hat);
  rd.number("sim", "P0", cfg.initial.P);
  rd.number("sim", "k_hat0", cfg.initial.k_hat);
  rd.number("sim", "l_hat0", cfg.initial.l_hat);
  rd.number("sim", "w_hat0", cfg.initial.w_hat);

  if (!errors.empty()) throw ConfigError(std::move(errors));
  if (auto problems = validate(cfg); !problems.empty()) {
    throw ConfigError(std::move(problems));
  }
  return cfg;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, std::string_view source) {
  bool named = false;
  return parse_impl(text, source, named);
}

ScenarioConfig parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  bool named = false;
  ScenarioConfig cfg = parse_impl(buf.str(), path.string(), named);
  if (!named) cfg.name = path.stem().string();
  return cfg;
}

std::string to_config_text(const ScenarioConfig& cfg) {
  const auto num = format_double;
  std::ostringstream os;
  os << "name = " << cfg.name << "\n\n[plant]\n";
  if (const auto* lin = std::get_if<LinearPlantParams>(&cfg.plant)) {
    os << "model = linear\n"
       << "a = " << num(lin->a) << "\nb = " << num(lin->b)
       << "\nw = " << num(lin->w) << "\n";
  } else {
    const auto& s = std::get<SurgePlantParams>(cfg.plant);
    os << "model = surge\n"
       << "m_total = " << num(s.m_total) << "\nd_l = " << num(s.d_l)
       << "\nd_q = " << num(s.d_q) << "\n";
  }

  const DesignParams& d = cfg.design;
  const bool blended = d.mode == ControllerMode::Blended;
  os << "\n[design]\n"
     << "mode = " << (blended ? "blended" : "unblended") << "\n"
     << "a_m = " << num(d.reference.a_m) << "\n"
     << "b_m = " << num(d.reference.b_m) << "\n"
     << "Q = " << num(d.Q) << "\n"
     << "R = " << num(d.R) << "\n"
     << "gamma1 = " << num(d.gains.gamma1) << "\n"
     << "gamma2 = " << num(d.gains.gamma2) << "\n"
     << "gamma3 = " << num(d.gains.gamma3) << "\n"
     << "m1 = " << num(d.m1) << "\n"
     << "m2 = " << num(d.gains.m2) << "\n"
     << "alpha = " << num(blended ? d.resolved_alpha() : d.alpha.value_or(0.0))
     << "\n"
     << "beta = " << num(d.beta) << "\n"
     << "sign_a = " << (d.sign_a == PoleSign::Positive ? "1" : "-1") << "\n"
     << "a_max = " << num(d.a_max) << "\n"
     << "sign_b = " << sign_text(d.gains.sign_b) << "\n"
     << "delta = " << num(d.weights().delta) << "\n";

  os << "\n[schedule]\n";
  for (const auto& e : cfg.schedule) {
    os << num(e.start_time) << " = " << num(e.value) << "\n";
  }

  os << "\n[sim]\n"
     << "dt = " << num(cfg.dt) << "\n"
     << "duration = " << num(cfg.duration) << "\n"
     << "control_period = " << num(cfg.control_period.value_or(cfg.dt)) << "\n"
     << "control_hold = "
     << (cfg.hold == ControlHold::Continuous ? "continuous" : "zoh") << "\n"
     << "seed = " << cfg.seed << "\n"
     << "measurement_noise = " << (cfg.measurement_noise ? "true" : "false")
     << "\n"
     << "process_noise = " << (cfg.process_noise ? "true" : "false") << "\n"
     << "divergence_threshold = " << num(cfg.divergence_threshold) << "\n"
     << "x0 = " << num(cfg.initial.x) << "\n"
     << "x_m0 = " << num(cfg.initial.x_m) << "\n"
     << "x_hat0 = " << num(cfg.initial.x_hat) << "\n"
     << "P0 = " << num(cfg.initial_covariance()) << "\n"
     << "k_hat0 = " << num(cfg.initial.k_hat) << "\n"
     << "l_hat0 = " << num(cfg.initial.l_hat) << "\n"
     << "w_hat0 = " << num(cfg.initial.w_hat) << "\n";
  return os.str();
}

std::vector<ScheduleEntry> noise_drift_schedule() {
  return {{0.0, 0.0},  {10.0, 0.2}, {20.0, 0.0},
          {30.0, 0.2}, {40.0, 0.0}, {50.0, 0.2}};
}

std::vector<ScheduleEntry> three_level_schedule() {
  std::vector<ScheduleEntry> s;
  const double levels[] = {0.0, 0.2, 0.3};
  for (int i = 0; i < 12; ++i) s.push_back({10.0 * i, levels[i % 3]});
  return s;
}

namespace {

ScenarioConfig baseline_design() {
  ScenarioConfig c;
  c.design.reference = {1.0, 1.0};
  c.design.Q = 5e-7;
  c.design.R = 3e-4;
  c.design.gains = {50.0, 50.0, 5.0, 70.0, 1.0};
  c.design.m1 = 1.0;
  c.design.beta = 1.0;
  c.dt = 0.01;
  c.duration = 120.0;
  c.seed = 1;
  return c;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "sim1_unblended", "sim1_blended", "sim2", "sim2_surge", "lab_like"};
  return names;
}

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c = baseline_design();
  c.name = std::string(name);
  if (name == "sim1_unblended" || name == "sim1_blended") {
    c.plant = SurgePlantParams{};
    c.schedule = noise_drift_schedule();
    c.design.sign_a = PoleSign::NonPositive;
    if (name == "sim1_unblended") {
      c.design.mode = ControllerMode::Unblended;
      c.design.alpha = 0.0;
    } else {
      c.design.mode = ControllerMode::Blended;
      c.design.alpha = 1.0;
    }
  } else if (name == "sim2" || name == "sim2_surge" || name == "lab_like") {
    c.schedule = three_level_schedule();
    c.design.mode = ControllerMode::Blended;
    c.design.alpha = 10.0 / 11.0;
    c.design.a_max = 0.1;
    if (name == "sim2") {
      c.plant = LinearPlantParams{0.05, 1.0, 0.0};
      c.design.sign_a = PoleSign::Positive;
    } else {
      // The surge model is stable; the declared bound only shapes alpha.
      c.plant = SurgePlantParams{};
      c.design.sign_a = PoleSign::NonPositive;
    }
    if (name == "lab_like") {
      c.dt = 0.1;
      c.hold = ControlHold::ZeroOrderHold;
      c.design.gains.m2 = 15.0;
      c.design.gains.gamma3 = 1.0;
    }
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

}  // namespace kfmrac
