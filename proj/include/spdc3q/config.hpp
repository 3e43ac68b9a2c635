#pragma once

// Run configuration: defaults, flat "key = value" config files, and the
// effective-config echo used in provenance blocks.
//
// File format: one "key = value" per line, '#' starts a comment, lists are
// comma separated, and a list entry "start:step:stop" expands to an
// inclusive arithmetic range.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdc3q/dynamics.hpp"
#include "spdc3q/fockspace.hpp"
#include "spdc3q/io.hpp"
#include "spdc3q/sweep.hpp"

namespace spdc3q {

struct RunConfig {
  SpaceConfig space = default_physics();
  double t_final = 25.0;
  double sample_spacing = 0.25;
  double dt = 0.0;  // <= 0 picks default_step
  Method method = Method::rk4;
  SweepGrid grid = SweepGrid::defaults();
  int jobs = 1;
  std::uint64_t seed = 20211;
  std::string out_dir = ".";
  bool strict = false;
  bool use_literal_projector = false;
  bool check_convergence = false;
  std::size_t samples = 100000;
  double norm_tolerance = 1e-9;
  double leakage_threshold = 1e-4;
  double convergence_tolerance = 1e-4;

  [[nodiscard]] double effective_dt() const { return dt > 0.0 ? dt : default_step(space.drive_freq()); }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["space"] = space_config_json(space);
    j["t_final"] = t_final;
    j["sample_spacing"] = sample_spacing;
    j["dt"] = effective_dt();
    j["method"] = method_name(method);
    j["grid"] = grid.to_json();
    j["jobs"] = jobs;
    j["seed"] = seed;
    j["strict"] = strict;
    j["use_literal_P"] = use_literal_projector;
    j["check_convergence"] = check_convergence;
    j["samples"] = samples;
    j["norm_tolerance"] = norm_tolerance;
    j["leakage_threshold"] = leakage_threshold;
    j["convergence_tolerance"] = convergence_tolerance;
    return j;
  }

  [[nodiscard]] SweepOptions sweep_options() const {
    SweepOptions o;
    o.method = method;
    o.dt = dt;
    o.jobs = jobs;
    o.norm_tolerance_per_time = norm_tolerance;
    o.leakage_threshold = leakage_threshold;
    o.check_convergence = check_convergence;
    o.convergence_tolerance = convergence_tolerance;
    return o;
  }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

}  // namespace config_detail

/// Parses "0.1,0.2" or "0.02:0.02:0.4" (inclusive) or a mix.
inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  using namespace config_detail;
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(to_double(key, item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos) throw ConfigError("config key '" + key + "': range must be start:step:stop");
    const double start = to_double(key, item.substr(0, c1));
    const double step = to_double(key, item.substr(c1 + 1, c2 - c1 - 1));
    const double stop = to_double(key, item.substr(c2 + 1));
    if (!(step > 0.0)) throw ConfigError("config key '" + key + "': range step must be > 0");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(start + static_cast<double>(k) * step);
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

inline std::array<double, kSites> parse_triple(const std::string& key, const std::string& text) {
  const auto v = parse_list(key, text);
  if (v.size() == 1) return {v[0], v[0], v[0]};
  if (v.size() != 3) throw ConfigError("config key '" + key + "': expected 1 or 3 values");
  return {v[0], v[1], v[2]};
}

/// Applies one key/value pair. Keys match the long CLI flags with '-'
/// replaced by '_'.
inline void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  using namespace config_detail;
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string v = trim(raw_value);
  if (key == "g0") {
    cfg.space.pump_coupling = to_double(key, v);
  } else if (key == "t_final") {
    cfg.t_final = to_double(key, v);
  } else if (key == "sample_spacing") {
    cfg.sample_spacing = to_double(key, v);
  } else if (key == "dt") {
    cfg.dt = to_double(key, v);
  } else if (key == "cutoff") {
    const auto c = parse_triple(key, v);
    for (int i = 0; i < kSites; ++i) {
      if (c[i] != std::floor(c[i])) throw ConfigError("config key 'cutoff' must be integral");
      cfg.space.cutoffs[i] = static_cast<int>(c[i]);
    }
  } else if (key == "omega") {
    cfg.space.mode_freqs = parse_triple(key, v);
  } else if (key == "qubit_omega") {
    cfg.space.qubit_freqs = parse_triple(key, v);
  } else if (key == "g") {
    cfg.space.rabi_couplings = parse_triple(key, v);
  } else if (key == "drive_freq") {
    cfg.space.set_drive_freq(to_double(key, v));
  } else if (key == "method") {
    cfg.method = parse_method(v);
  } else if (key == "grid_g0") {
    cfg.grid.g0_values = parse_list(key, v);
  } else if (key == "grid_t") {
    cfg.grid.times = parse_list(key, v);
  } else if (key == "jobs") {
    cfg.jobs = static_cast<int>(to_int(key, v));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_int(key, v));
  } else if (key == "out") {
    cfg.out_dir = v;
  } else if (key == "strict") {
    cfg.strict = to_bool(key, v);
  } else if (key == "use_literal_P") {
    cfg.use_literal_projector = to_bool(key, v);
  } else if (key == "check_convergence") {
    cfg.check_convergence = to_bool(key, v);
  } else if (key == "samples") {
    cfg.samples = static_cast<std::size_t>(to_int(key, v));
  } else if (key == "norm_tolerance") {
    cfg.norm_tolerance = to_double(key, v);
  } else if (key == "leakage_threshold") {
    cfg.leakage_threshold = to_double(key, v);
  } else if (key == "convergence_tolerance") {
    cfg.convergence_tolerance = to_double(key, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

inline void apply_config_text(RunConfig& cfg, std::istream& in, const std::string& origin = "<config>") {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_config_text(cfg, in, path);
}

inline void validate(const RunConfig& cfg) {
  cfg.space.validate();
  cfg.grid.validate();
  if (!(cfg.t_final >= 0.0)) throw ConfigError("t_final must be >= 0");
  if (!(cfg.sample_spacing > 0.0)) throw ConfigError("sample_spacing must be > 0");
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (cfg.samples < 1) throw ConfigError("samples must be >= 1");
}

}  // namespace spdc3q
