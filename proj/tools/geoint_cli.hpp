// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: `gc`, `gravity`, `scan` and `check`. Every flag
// is described once in an option table that drives CLI11 registration,
// JSON config loading and --dump-config.

#ifndef GEOINT_TOOLS_CLI_HPP
#define GEOINT_TOOLS_CLI_HPP

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "geoint/checks.hpp"
#include "geoint/experiments.hpp"

namespace geoint::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Every tunable of every subcommand. Vector-valued flags are kept as
/// comma-separated text and parsed at dispatch.
struct RunConfig {
  std::string command;
  // guiding center
  std::string field = "quadratic";
  double b0 = 1.0;
  double alpha = 0.001;
  double mu = 1.0;
  double tau = 1.0;
  double hbar = 0.1;
  double theta0 = 2.0;
  std::size_t steps = 1000;
  std::string gc_q = "1,1";
  std::string gc_v = "xh";
  std::string gc_integrator = "slm";
  // gravity
  double eps = presets::kGravityEps;
  std::string potential = "gravity";
  double fast_q = 1.0;
  double fast_p = 0.0;
  std::string slow_Q;
  std::string slow_P;
  std::string gravity_integrator = "fastslow";
  // scan
  std::string param = "hbar";
  std::string values = "0.2,0.15,0.1,0.075";
  std::size_t budget = 5'000'000;
  std::size_t window = 200;
  std::size_t amplitude_window = 2000;
  unsigned jobs = 1;
  std::string x0 = "2,0";
  // shared
  double fp_tol = 1e-12;
  std::size_t fp_max_iter = 200;
  std::string out;
  std::string format = "csv";

  RunConfig() {
    const FsState s = presets::gravity_initial();
    std::ostringstream q, p;
    q << std::setprecision(17) << s.Q[0] << ',' << s.Q[1] << ',' << s.Q[2] << ',' << s.Q[3];
    p << std::setprecision(17) << s.P[0] << ',' << s.P[1] << ',' << s.P[2] << ',' << s.P[3];
    slow_Q = q.str();
    slow_P = p.str();
  }
};

enum Cmd : unsigned { kGc = 1, kGravity = 2, kScan = 4, kCheck = 8, kAll = 15 };

struct OptionSpec {
  const char* name;  // flag without leading dashes; also the JSON key
  const char* help;
  unsigned commands;
  std::variant<double RunConfig::*, std::size_t RunConfig::*, unsigned RunConfig::*, std::string RunConfig::*> member;
};

inline const std::vector<OptionSpec>& option_table() {
  static const std::vector<OptionSpec> table = {
      {"field", "quadratic | figure8", kGc, &RunConfig::field},
      {"b0", "quadratic field strength B0", kGc, &RunConfig::b0},
      {"alpha", "quadratic field curvature alpha", kGc, &RunConfig::alpha},
      {"mu", "magnetic moment", kGc | kScan, &RunConfig::mu},
      {"tau", "time scaling; the drift uses mu * tau", kGc | kScan, &RunConfig::tau},
      {"hbar", "step parameter hbar", kGc | kGravity | kScan, &RunConfig::hbar},
      {"theta0", "rotation angle of the limit map", kGc | kGravity | kScan, &RunConfig::theta0},
      {"steps", "number of steps", kGc | kGravity, &RunConfig::steps},
      {"q", "initial position x,y", kGc, &RunConfig::gc_q},
      {"v", "initial velocity vx,vy or 'xh' for X_H(q)", kGc, &RunConfig::gc_v},
      {"integrator", "slm | rk4", kGc, &RunConfig::gc_integrator},
      {"eps", "oscillator scale separation epsilon", kGravity, &RunConfig::eps},
      {"potential", "gravity | zero | harmonic", kGravity, &RunConfig::potential},
      {"q", "initial fast position", kGravity, &RunConfig::fast_q},
      {"p", "initial fast momentum", kGravity, &RunConfig::fast_p},
      {"Q", "initial body positions x1,y1,x2,y2", kGravity, &RunConfig::slow_Q},
      {"P", "initial body momenta px1,py1,px2,py2", kGravity, &RunConfig::slow_P},
      {"integrator", "fastslow | stiff_midpoint", kGravity, &RunConfig::gravity_integrator},
      {"param", "swept parameter: theta0 | hbar", kScan, &RunConfig::param},
      {"values", "comma-separated sweep values", kScan, &RunConfig::values},
      {"budget", "step budget per sweep point", kScan, &RunConfig::budget},
      {"window", "moving-average window (steps)", kScan, &RunConfig::window},
      {"amplitude-window", "initial segment for the oscillation amplitude", kScan, &RunConfig::amplitude_window},
      {"jobs", "worker threads", kScan, &RunConfig::jobs},
      {"x0", "initial position x,y", kScan, &RunConfig::x0},
      {"fp-tol", "fixed-point tolerance", kGc | kGravity | kScan, &RunConfig::fp_tol},
      {"fp-max-iter", "fixed-point iteration cap", kGc | kGravity | kScan, &RunConfig::fp_max_iter},
      {"out", "output path (stdout when empty)", kAll, &RunConfig::out},
      {"format", "csv | json", kGc | kGravity | kScan | kCheck, &RunConfig::format},
  };
  return table;
}

inline unsigned command_bit(const std::string& c) {
  if (c == "gc") return kGc;
  if (c == "gravity") return kGravity;
  if (c == "scan") return kScan;
  if (c == "check") return kCheck;
  return 0;
}

/// Raised for malformed configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (expected != 0 && out.size() != expected)
    throw ConfigError(std::string(what) + ": expected " + std::to_string(expected) + " comma-separated numbers");
  return out;
}

inline Vec2 parse_vec2(const std::string& text, const char* what) {
  const auto v = parse_list(text, 2, what);
  return {v[0], v[1]};
}

inline Vec4 parse_vec4(const std::string& text, const char* what) {
  const auto v = parse_list(text, 4, what);
  return {v[0], v[1], v[2], v[3]};
}

inline void load_json_config(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a flat JSON object");
  const unsigned bit = command_bit(cfg.command);
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      if (!value.is_string() || value.get<std::string>() != cfg.command)
        throw ConfigError("config file is for command " + value.dump() + ", not '" + cfg.command + "'");
      continue;
    }
    const OptionSpec* spec = nullptr;
    for (const auto& o : option_table())
      if (key == o.name && (o.commands & bit)) spec = &o;
    if (!spec) throw ConfigError("unknown config key '" + key + "' for command " + cfg.command);
    try {
      std::visit([&](auto member) { value.get_to(cfg.*member); }, spec->member);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

inline nlohmann::json dump_json_config(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  const unsigned bit = command_bit(cfg.command);
  for (const auto& o : option_table()) {
    if (!(o.commands & bit) || std::string(o.name) == "out") continue;
    std::visit([&](auto member) { j[o.name] = cfg.*member; }, o.member);
  }
  return j;
}

/// Finds `--config PATH` or `--config=PATH` ahead of CLI11 so that file
/// values become the defaults that explicit flags override.
inline std::optional<std::string> prescan_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

inline void configure_logging() {
  auto logger = spdlog::get("geoint");
  if (!logger) {
    logger = spdlog::stderr_logger_mt("geoint");
    logger->set_pattern("[%l] %v");
  }
  const char* env = std::getenv("GEOINT_LOG");
  const std::string level = env ? env : "info";
  if (level == "quiet") {
    logger->set_level(spdlog::level::err);
  } else if (level == "debug") {
    logger->set_level(spdlog::level::debug);
  } else {
    logger->set_level(spdlog::level::info);
    if (level != "info") logger->warn("GEOINT_LOG='{}' not recognised; using info", level);
  }
  spdlog::set_default_logger(logger);
}

/// Writes rows of doubles with 17 significant digits.
class TableWriter {
 public:
  TableWriter(std::ostream& os, std::string format, std::vector<std::string> columns)
      : os_(os), json_(format == "json"), columns_(std::move(columns)) {
    if (json_) return;
    os_ << std::setprecision(17);
    for (std::size_t i = 0; i < columns_.size(); ++i) os_ << (i ? "," : "") << columns_[i];
    os_ << '\n';
  }

  void row(const std::vector<double>& values) {
    if (json_) {
      rows_.push_back(values);
      return;
    }
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << values[i];
    os_ << '\n';
  }

  /// Mixed row for the scan table; empty strings become empty CSV cells.
  void text_row(const std::vector<std::string>& cells) {
    if (json_) {
      nlohmann::json r = nlohmann::json::array();
      for (const auto& c : cells) r.push_back(c);
      text_rows_.push_back(r);
      return;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

  void finish(const std::optional<RunFailure>& failure) {
    if (!json_) {
      if (failure) os_ << "# aborted at step " << failure->step << ": " << failure->reason << '\n';
      return;
    }
    nlohmann::json j;
    j["columns"] = columns_;
    j["rows"] = text_rows_.empty() ? nlohmann::json(rows_) : text_rows_;
    j["aborted"] = failure ? nlohmann::json{{"step", failure->step}, {"reason", failure->reason}} : nlohmann::json();
    os_ << j.dump() << '\n';
  }

 private:
  std::ostream& os_;
  bool json_;
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
  nlohmann::json text_rows_ = nlohmann::json::array();
};

inline std::string fmt17(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline AnyField make_field(const RunConfig& c) {
  if (c.field == "quadratic") return QuadraticField{c.b0, c.alpha};
  if (c.field == "figure8") return FigureEightField{};
  throw ConfigError("--field must be quadratic or figure8");
}

inline AnyPotential make_potential(const RunConfig& c) {
  if (c.potential == "gravity") return TwoBodyGravity{};
  if (c.potential == "zero") return ZeroPotential{};
  if (c.potential == "harmonic") return HarmonicPotential{};
  throw ConfigError("--potential must be gravity, zero or harmonic");
}

inline SlmParams make_slm_params(const RunConfig& c) {
  SlmParams p;
  p.hbar = c.hbar;
  p.theta0 = c.theta0;
  p.drift = {c.mu, c.tau};
  p.fp_tol = c.fp_tol;
  p.fp_max_iter = c.fp_max_iter;
  return p;
}

inline void check_format(const RunConfig& c) {
  if (c.format != "csv" && c.format != "json") throw ConfigError("--format must be csv or json");
}

/// Output sink: the --out file, or `fallback` when no path is given.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw ConfigError("cannot open output file '" + path + "'");
    os_ = &file_;
  }
  std::ostream& stream() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

inline int report_failure(const std::optional<RunFailure>& failure, std::ostream& err) {
  if (!failure) return kExitOk;
  err << "error: aborted at step " << failure->step << ": " << failure->reason << '\n';
  return kExitRuntime;
}

inline int run_gc_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_format(c);
  const AnyField field = make_field(c);
  const SlmParams p = make_slm_params(c);
  p.validate();
  if (!(c.theta0 > 0.0 && c.theta0 < 2.0 * std::numbers::pi))
    throw ConfigError("--theta0 must lie in (0, pi) or (pi, 2 pi)");
  GcIntegrator integrator;
  if (c.gc_integrator == "slm") {
    integrator = GcIntegrator::slm;
  } else if (c.gc_integrator == "rk4") {
    integrator = GcIntegrator::rk4;
  } else {
    throw ConfigError("--integrator must be slm or rk4 for gc");
  }
  GCState s0;
  s0.q = parse_vec2(c.gc_q, "--q");
  if (c.gc_v == "xh") {
    s0.v = std::visit([&](const auto& f) { return drift_velocity(f, p.drift, s0.q); }, field);
  } else {
    s0.v = parse_vec2(c.gc_v, "--v");
  }
  Sink sink(c.out, out);
  spdlog::info("gc: {} steps, hbar={}, theta0={}, integrator={}", c.steps, c.hbar, c.theta0, c.gc_integrator);
  const GcSeries series = run_gc(field, p, s0, c.steps, integrator);
  TableWriter w(sink.stream(), c.format, {"step", "t", "x", "y", "vx", "vy", "mu", "energy"});
  for (const auto& r : series.records)
    w.row({static_cast<double>(r.step), r.t, r.state.q.x, r.state.q.y, r.state.v.x, r.state.v.y, r.mu, r.energy});
  w.finish(series.failure);
  return report_failure(series.failure, err);
}

inline int run_gravity_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_format(c);
  const AnyPotential pot = make_potential(c);
  GravityParams gp;
  gp.fs.hbar = c.hbar;
  gp.fs.theta0 = c.theta0;
  gp.fs.eps = c.eps;
  gp.fs.fp_tol = c.fp_tol;
  gp.fs.fp_max_iter = c.fp_max_iter;
  gp.fs.validate();
  GravityIntegrator integrator;
  if (c.gravity_integrator == "fastslow") {
    integrator = GravityIntegrator::fastslow;
  } else if (c.gravity_integrator == "stiff_midpoint") {
    integrator = GravityIntegrator::stiff_midpoint;
  } else {
    throw ConfigError("--integrator must be fastslow or stiff_midpoint for gravity");
  }
  const FsState s0{c.fast_q, c.fast_p, parse_vec4(c.slow_Q, "--Q"), parse_vec4(c.slow_P, "--P")};
  Sink sink(c.out, out);
  spdlog::info("gravity: {} steps, hbar={}, eps={}, theta0={}, integrator={}", c.steps, c.hbar, c.eps, c.theta0,
               c.gravity_integrator);
  const GravitySeries series = run_gravity(pot, gp, s0, c.steps, integrator);
  TableWriter w(sink.stream(), c.format,
                {"step", "t", "q", "p", "Q1x", "Q1y", "Q2x", "Q2y", "P1x", "P1y", "P2x", "P2y", "mu0", "eslow"});
  for (const auto& r : series.records) {
    const auto& s = r.state;
    w.row({static_cast<double>(r.step), r.t, s.q, s.p, s.Q[0], s.Q[1], s.Q[2], s.Q[3], s.P[0], s.P[1], s.P[2], s.P[3],
           r.mu0, r.eslow});
  }
  w.finish(series.failure);
  return report_failure(series.failure, err);
}

inline int run_scan_command(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_format(c);
  SweepSpec spec;
  if (c.param == "theta0") {
    spec.parameter = SweepParameter::theta0;
  } else if (c.param == "hbar") {
    spec.parameter = SweepParameter::hbar;
  } else {
    throw ConfigError("--param must be theta0 or hbar");
  }
  spec.values = c.values.empty() ? std::vector<double>{} : parse_list(c.values, 0, "--values");
  spec.step_budget = c.budget;
  spec.base = make_slm_params(c);
  spec.q0 = parse_vec2(c.x0, "--x0");
  spec.breakdown = {c.window, c.amplitude_window};
  spec.jobs = c.jobs;
  spec.validate();
  Sink sink(c.out, out);
  spdlog::info("scan: {} over {} values, budget {} steps, {} job(s)", c.param, spec.values.size(), c.budget, c.jobs);
  const auto rows = scan_breakdown(spec);
  TableWriter w(sink.stream(), c.format, {"param", "value", "t_breakdown", "status"});
  bool any_error = false;
  for (const auto& r : rows) {
    w.text_row({to_string(r.parameter), fmt17(r.value), r.t_breakdown ? fmt17(*r.t_breakdown) : "",
                to_string(r.status)});
    if (r.status == ScanStatus::error) {
      any_error = true;
      err << "error: " << to_string(r.parameter) << "=" << fmt17(r.value) << " aborted at step " << r.steps + 1
          << ": " << r.message << '\n';
    }
    spdlog::debug("{}={} status={} steps={}", to_string(r.parameter), r.value, to_string(r.status), r.steps);
  }
  w.finish(std::nullopt);
  return any_error ? kExitRuntime : kExitOk;
}

inline int run_check_command(const RunConfig& c, std::ostream& out) {
  check_format(c);
  Sink sink(c.out, out);
  const auto results = run_checks();
  bool all = true;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results) {
    all = all && r.passed;
    if (c.format == "json") {
      j.push_back({{"name", r.name}, {"passed", r.passed}, {"value", r.value}, {"bound", r.bound}, {"note", r.note}});
    } else {
      sink.stream() << (r.passed ? "PASS " : "FAIL ") << r.name << " (value " << fmt17(r.value) << ", bound "
                    << fmt17(r.bound) << ")" << (r.note.empty() ? "" : " " + r.note) << '\n';
    }
  }
  if (c.format == "json") sink.stream() << j.dump(2) << '\n';
  return all ? kExitOk : kExitRuntime;
}

/// Entry point; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  configure_logging();
  std::vector<std::string> args(argv + 1, argv + argc);

  CLI::App app{"Nearly-periodic map integrators: guiding-center drift and fast-slow gravity", "geoint"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;
  std::string dump_path;

  struct Sub {
    const char* name;
    const char* help;
    CLI::App* app;
  };
  std::vector<Sub> subs = {{"gc", "guiding-center run (slm or rk4)", nullptr},
                           {"gravity", "fast-slow oscillator coupled to two-body gravity", nullptr},
                           {"scan", "breakdown-time sweep over theta0 or hbar", nullptr},
                           {"check", "run the invariant suite", nullptr}};
  for (auto& sub : subs) {
    sub.app = app.add_subcommand(sub.name, sub.help);
    const unsigned bit = command_bit(sub.name);
    for (const auto& o : option_table()) {
      if (!(o.commands & bit)) continue;
      std::visit([&](auto member) { sub.app->add_option(std::string("--") + o.name, cfg.*member, o.help); }, o.member);
    }
    sub.app->add_option("--config", config_path, "flat JSON config; explicit flags override it");
    sub.app->add_option("--dump-config", dump_path, "write the effective config as JSON");
  }

  // Determine the subcommand and load the config file before parsing so
  // explicit flags land on top of file values.
  for (const auto& a : args) {
    if (command_bit(a)) {
      cfg.command = a;
      break;
    }
  }
  try {
    if (const auto path = prescan_config(args); path && !cfg.command.empty()) {
      std::ifstream in(*path);
      if (!in) throw ConfigError("cannot read config file '" + *path + "'");
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + *path + "': " + e.what());
      }
      load_json_config(cfg, j);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitValidation;
  }

  try {
    if (!dump_path.empty()) {
      std::ofstream f(dump_path, std::ios::binary);
      if (!f) throw ConfigError("cannot write config file '" + dump_path + "'");
      f << dump_json_config(cfg).dump(2) << '\n';
    }
    if (cfg.command == "gc") return run_gc_command(cfg, out, err);
    if (cfg.command == "gravity") return run_gravity_command(cfg, out, err);
    if (cfg.command == "scan") return run_scan_command(cfg, out, err);
    return run_check_command(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace geoint::cli

#endif  // GEOINT_TOOLS_CLI_HPP
