#pragma once

// CSV rows for observable records, stable hashing for output names, and
// provenance blocks.

#include <array>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdc3q/dynamics.hpp"
#include "spdc3q/fockspace.hpp"
#include "spdc3q/observables.hpp"

#ifndef SPDC3Q_VERSION
#define SPDC3Q_VERSION "0.0.0"
#endif

namespace spdc3q {

inline std::string version() { return SPDC3Q_VERSION; }

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Observable columns in their fixed order.
inline std::vector<std::string> observable_columns() {
  std::vector<std::string> cols{"t", "g0", "G_CV", "G_CV_prime", "G_DV"};
  for (const char* fam : {"x", "p", "Sx", "Sy", "Sz"}) {
    for (const char* pr : {"12", "13", "23"}) cols.push_back(std::string("Δ²") + fam + pr);
  }
  cols.emplace_back("P_expect");
  cols.emplace_back("norm");
  return cols;
}

inline std::vector<double> observable_values(const ObservableRecord& r) {
  std::vector<double> v{r.t, r.g0, r.witness.g_cv, r.witness.g_cv_prime, r.witness.g_dv};
  for (const auto* fam : {&r.cov.x, &r.cov.p, &r.cov.s_x, &r.cov.s_y, &r.cov.s_z}) {
    for (double c : *fam) v.push_back(c);
  }
  v.push_back(r.p_expect);
  v.push_back(r.norm);
  return v;
}

inline void write_csv_row(std::ostream& os, const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) os << ',';
    os << format_double(values[k]);
  }
  os << '\n';
}

inline void write_csv_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (k) os << ',';
    os << cols[k];
  }
  os << '\n';
}

/// Trajectory dump: t, norm, P_expect, leak1..3, then the remaining
/// observable columns.
inline std::vector<std::string> trajectory_columns() {
  std::vector<std::string> cols{"t", "norm", "P_expect", "leak1", "leak2", "leak3"};
  for (const auto& c : observable_columns()) {
    if (c != "t" && c != "norm" && c != "P_expect") cols.push_back(c);
  }
  return cols;
}

inline std::vector<double> trajectory_values(const ObservableRecord& r, const std::array<double, kSites>& leak) {
  std::vector<double> v{r.t, r.norm, r.p_expect, leak[0], leak[1], leak[2]};
  const auto all = observable_values(r);
  const auto cols = observable_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] != "t" && cols[k] != "norm" && cols[k] != "P_expect") v.push_back(all[k]);
  }
  return v;
}

inline nlohmann::ordered_json space_config_json(const SpaceConfig& c) {
  nlohmann::ordered_json j;
  j["cutoffs"] = c.cutoffs;
  j["mode_freqs"] = c.mode_freqs;
  j["qubit_freqs"] = c.qubit_freqs;
  j["rabi_couplings"] = c.rabi_couplings;
  j["pump_coupling"] = c.pump_coupling;
  j["drive_freq"] = c.drive_freq();
  return j;
}

/// Canonical text of a configuration, used for hashing.
inline std::string canonical_text(const nlohmann::ordered_json& j) { return j.dump(); }

inline nlohmann::ordered_json provenance_block(const nlohmann::ordered_json& effective_config, Method method,
                                               double dt, const std::array<int, kSites>& cutoffs) {
  nlohmann::ordered_json p;
  p["version"] = version();
  p["config_hash"] = hex16(fnv1a(canonical_text(effective_config)));
  p["method"] = method_name(method);
  p["dt"] = dt;
  p["cutoffs"] = cutoffs;
  p["config"] = effective_config;
  return p;
}

}  // namespace spdc3q
