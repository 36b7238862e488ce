#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "d2dcache/anneal.hpp"
#include "d2dcache/model.hpp"
#include "d2dcache/sim.hpp"
#include "d2dcache/table.hpp"

namespace d2dcache::experiment {

enum class Strategy { HitOpt, ThptOpt, Mpc };

inline constexpr std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::HitOpt: return "hit-opt";
    case Strategy::ThptOpt: return "thpt-opt";
    case Strategy::Mpc: return "mpc";
  }
  return "?";
}

enum class OutputFormat { Csv, Json };

/// Parameter names that a sweep may vary.
inline const std::vector<std::string>& sweepable_parameters() {
  static const std::vector<std::string> names = {"lambda_u", "rho",   "r_d",      "p_d_mw",
                                                 "sigma2_dbm", "alpha", "theta_db", "gamma"};
  return names;
}

/// Everything one CLI run needs. Powers and thresholds are kept in the units
/// the user writes (mW, dBm, dB) and converted by network().
struct ExperimentConfig {
  double lambda_u = 1e-4;
  double rho = 0.5;
  double r_d = 75.0;
  double p_d_mw = 0.1;
  double sigma2_dbm = -110.0;
  double alpha = 4.0;
  double theta_db = 0.0;

  std::size_t n_files = 20;
  double gamma = 0.5;
  std::size_t m_d = 2;

  std::vector<Strategy> strategies = {Strategy::HitOpt, Strategy::ThptOpt, Strategy::Mpc};

  std::string sweep_param;  // empty: no sweep
  std::vector<double> sweep_values;

  double window_side = 1500.0;
  std::size_t n_snapshots = 200;
  std::uint64_t seed = 1;
  sim::ConflictRule conflict = sim::ConflictRule::Nearest;

  AnnealSchedule schedule;

  std::string output;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;

  NetworkConfig network() const {
    NetworkConfig cfg;
    cfg.lambda_u = lambda_u;
    cfg.rho = rho;
    cfg.r_d = r_d;
    cfg.p_d = p_d_mw;
    cfg.sigma2 = db_to_linear(sigma2_dbm);
    cfg.alpha = alpha;
    cfg.theta = db_to_linear(theta_db);
    return cfg;
  }

  ContentModel content() const { return ContentModel::zipf(n_files, gamma); }
  sim::SimWindow window() const { return sim::SimWindow{window_side}; }

  double& parameter(const std::string& name) {
    if (name == "lambda_u") return lambda_u;
    if (name == "rho") return rho;
    if (name == "r_d") return r_d;
    if (name == "p_d_mw") return p_d_mw;
    if (name == "sigma2_dbm") return sigma2_dbm;
    if (name == "alpha") return alpha;
    if (name == "theta_db") return theta_db;
    if (name == "gamma") return gamma;
    throw Error(ErrorKind::ConfigParse, "unknown sweep parameter '" + name + "'");
  }

  double parameter(const std::string& name) const { return const_cast<ExperimentConfig*>(this)->parameter(name); }

  ExperimentConfig with_parameter(const std::string& name, double value) const {
    ExperimentConfig copy = *this;
    copy.parameter(name) = value;
    return copy;
  }

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigParse, what); };
    network().validate();
    if (n_files == 0) fail("n_files must be >= 1");
    if (!(gamma >= 0.0)) fail("gamma must be >= 0");
    if (m_d > n_files) fail("m_d must not exceed n_files");
    if (strategies.empty()) fail("strategies must not be empty");
    if (!sweep_param.empty()) {
      (void)parameter(sweep_param);
      if (sweep_values.empty()) fail("sweep_values must not be empty");
      for (std::size_t k = 1; k < sweep_values.size(); ++k) {
        if (!(sweep_values[k] > sweep_values[k - 1])) fail("sweep_values must be strictly increasing");
      }
      for (double v : sweep_values) with_parameter(sweep_param, v).network().validate();
    } else if (!sweep_values.empty()) {
      fail("sweep_values given without sweep_param");
    }
    if (n_snapshots == 0) fail("n_snapshots must be >= 1");
    window().validate(network());
    schedule.validate();
  }

  /// Canonical, order-fixed description of every field; the basis of the
  /// config hash.
  nlohmann::json to_json() const {
    nlohmann::json strat = nlohmann::json::array();
    for (Strategy s : strategies) strat.push_back(std::string(to_string(s)));
    return nlohmann::json{
        {"lambda_u", lambda_u},
        {"rho", rho},
        {"r_d", r_d},
        {"p_d_mw", p_d_mw},
        {"sigma2_dbm", sigma2_dbm},
        {"alpha", alpha},
        {"theta_db", theta_db},
        {"n_files", n_files},
        {"gamma", gamma},
        {"m_d", m_d},
        {"strategies", strat},
        {"sweep_param", sweep_param},
        {"sweep_values", sweep_values},
        {"window_side", window_side},
        {"n_snapshots", n_snapshots},
        {"seed", seed},
        {"conflict", conflict == sim::ConflictRule::Nearest ? "nearest" : "random"},
        {"sa_initial_temperature",
         schedule.initial_temperature ? nlohmann::json(*schedule.initial_temperature) : nlohmann::json(nullptr)},
        {"sa_target_acceptance", schedule.target_acceptance},
        {"sa_probe_moves", schedule.probe_moves},
        {"sa_cooling", schedule.cooling},
        {"sa_moves_per_temperature", schedule.moves_per_temperature},
        {"sa_min_temperature_ratio", schedule.min_temperature_ratio},
        {"sa_max_stale", schedule.max_stale_temperatures},
        {"sa_restarts", schedule.restarts},
        {"sa_max_step", schedule.max_step},
        {"sa_min_step_ratio", schedule.min_step_ratio},
        {"sa_inequality", schedule.inequality},
    };
  }
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Hash of the canonical config together with the command that consumes it.
inline std::string config_hash(const ExperimentConfig& cfg, std::string_view command) {
  return fnv1a_hex(std::string(command) + "\n" + cfg.to_json().dump());
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(value);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::uint64_t parse_unsigned(const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw Error(ErrorKind::ConfigParse, "not a non-negative integer: '" + v + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::ConfigParse, "not a boolean: '" + v + "'");
}

}  // namespace detail

inline Strategy parse_strategy(const std::string& v) {
  if (v == "hit-opt") return Strategy::HitOpt;
  if (v == "thpt-opt") return Strategy::ThptOpt;
  if (v == "mpc") return Strategy::Mpc;
  throw Error(ErrorKind::ConfigParse, "unknown strategy '" + v + "' (expected hit-opt, thpt-opt or mpc)");
}

inline sim::ConflictRule parse_conflict(const std::string& v) {
  if (v == "nearest") return sim::ConflictRule::Nearest;
  if (v == "random") return sim::ConflictRule::Random;
  throw Error(ErrorKind::ConfigParse, "unknown conflict rule '" + v + "' (expected nearest or random)");
}

inline OutputFormat parse_format(const std::string& v) {
  if (v == "csv") return OutputFormat::Csv;
  if (v == "json") return OutputFormat::Json;
  throw Error(ErrorKind::ConfigParse, "unknown format '" + v + "' (expected csv or json)");
}

/// Assigns one key of the flat config format. Shared by the file parser and
/// the CLI override flags.
inline void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_unsigned;
  using io::parse_double;
  auto& s = cfg.schedule;
  if (key == "lambda_u") cfg.lambda_u = parse_double(value);
  else if (key == "rho") cfg.rho = parse_double(value);
  else if (key == "r_d") cfg.r_d = parse_double(value);
  else if (key == "p_d_mw") cfg.p_d_mw = parse_double(value);
  else if (key == "sigma2_dbm") cfg.sigma2_dbm = parse_double(value);
  else if (key == "alpha") cfg.alpha = parse_double(value);
  else if (key == "theta_db") cfg.theta_db = parse_double(value);
  else if (key == "n_files") cfg.n_files = parse_unsigned(value);
  else if (key == "gamma") cfg.gamma = parse_double(value);
  else if (key == "m_d") cfg.m_d = parse_unsigned(value);
  else if (key == "strategies") {
    cfg.strategies.clear();
    for (const auto& item : detail::split_list(value)) cfg.strategies.push_back(parse_strategy(item));
  } else if (key == "sweep_param") cfg.sweep_param = value;
  else if (key == "sweep_values") {
    cfg.sweep_values.clear();
    for (const auto& item : detail::split_list(value)) cfg.sweep_values.push_back(parse_double(item));
  } else if (key == "window_side") cfg.window_side = parse_double(value);
  else if (key == "n_snapshots") cfg.n_snapshots = parse_unsigned(value);
  else if (key == "seed") cfg.seed = parse_unsigned(value);
  else if (key == "conflict") cfg.conflict = parse_conflict(value);
  else if (key == "sa_initial_temperature") {
    if (value == "auto") s.initial_temperature.reset();
    else s.initial_temperature = parse_double(value);
  } else if (key == "sa_target_acceptance") s.target_acceptance = parse_double(value);
  else if (key == "sa_probe_moves") s.probe_moves = parse_unsigned(value);
  else if (key == "sa_cooling") s.cooling = parse_double(value);
  else if (key == "sa_moves_per_temperature") s.moves_per_temperature = parse_unsigned(value);
  else if (key == "sa_min_temperature_ratio") s.min_temperature_ratio = parse_double(value);
  else if (key == "sa_max_stale") s.max_stale_temperatures = parse_unsigned(value);
  else if (key == "sa_restarts") s.restarts = parse_unsigned(value);
  else if (key == "sa_max_step") s.max_step = parse_double(value);
  else if (key == "sa_min_step_ratio") s.min_step_ratio = parse_double(value);
  else if (key == "sa_inequality") s.inequality = parse_bool(value);
  else if (key == "output") cfg.output = value;
  else if (key == "format") cfg.format = parse_format(value);
  else throw Error(ErrorKind::ConfigParse, "unknown key '" + key + "'");
}

/// Parses the flat "key = value" format ('#' starts a comment) on top of the
/// defaults. Errors name the source and line.
inline ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>",
                                     ExperimentConfig cfg = {}) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto where = origin + ":" + std::to_string(line_no) + ": ";
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ConfigParse, where + "expected 'key = value'");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::ConfigParse, where + "missing key");
    try {
      set_field(cfg, key, value);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigParse, where + "field '" + key + "': " + e.detail());
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read config " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str(), path, std::move(base));
}

}  // namespace d2dcache::experiment
