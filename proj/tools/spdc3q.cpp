// spdc3q command-line driver: evolve, sweep, verify, reference.
//
// Exit codes: 0 success, 1 invariant or numerical failure, 2 usage/config/IO error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "spdc3q/config.hpp"
#include "spdc3q/dynamics.hpp"
#include "spdc3q/io.hpp"
#include "spdc3q/observables.hpp"
#include "spdc3q/operators.hpp"
#include "spdc3q/qubitstates.hpp"
#include "spdc3q/sweep.hpp"
#include "spdc3q/verify.hpp"

namespace fs = std::filesystem;
using namespace spdc3q;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& p) {
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream os(p, std::ios::binary);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) {
  auto os = open_out(p);
  os << j.dump(2) << '\n';
}

nlohmann::ordered_json evolve_config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = "evolve";
  j["space"] = space_config_json(cfg.space);
  j["t_final"] = cfg.t_final;
  j["sample_spacing"] = cfg.sample_spacing;
  j["method"] = method_name(cfg.method);
  j["dt"] = cfg.effective_dt();
  j["norm_tolerance"] = cfg.norm_tolerance;
  j["leakage_threshold"] = cfg.leakage_threshold;
  return j;
}

nlohmann::ordered_json provenance_for(const RunConfig& cfg, const nlohmann::ordered_json& effective) {
  return provenance_block(effective, cfg.method, cfg.effective_dt(), cfg.space.cutoffs);
}

int cmd_evolve(const RunConfig& cfg) {
  const auto space = build_space(cfg.space);
  const auto ham = build_hamiltonian(space);
  const ObservableOperators ops(space);
  EvolutionSpec spec;
  spec.t_final = cfg.t_final;
  spec.sample_times = uniform_times(cfg.t_final, cfg.sample_spacing);
  spec.method = cfg.method;
  spec.dt = cfg.dt;
  spec.norm_tolerance_per_time = cfg.norm_tolerance;
  spec.leakage_threshold = cfg.leakage_threshold;

  const auto effective = evolve_config_json(cfg);
  const auto prov = provenance_for(cfg, effective);
  const std::string hash = prov["config_hash"];
  const fs::path csv = fs::path(cfg.out_dir) / ("trajectory_" + hash + ".csv");
  const fs::path side = fs::path(cfg.out_dir) / ("trajectory_" + hash + ".json");

  auto os = open_out(csv);
  write_csv_header(os, trajectory_columns());
  const auto result = evolve(ham, spec, vacuum_state(space), [&](double t, const StateVector& s) {
    write_csv_row(os, trajectory_values(observe(s, ops, t, cfg.space.pump_coupling), top_level_population(s)));
  });
  os.close();

  nlohmann::ordered_json j;
  j["provenance"] = prov;
  j["ok"] = result.ok;
  if (!result.ok) j["diagnostic"] = result.diagnostic;
  j["samples"] = result.times.size();
  j["max_norm_deviation"] = result.max_norm_deviation;
  j["peak_leakage"] = result.peak_leakage;
  j["warnings"] = result.warnings;
  write_json(side, j);

  std::cout << csv.string() << '\n' << side.string() << '\n';
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  if (!result.ok) {
    std::cerr << "error: " << result.diagnostic << '\n';
    return kExitFail;
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
  const auto result = run_sweep(cfg.grid, cfg.space, cfg.sweep_options());
  const std::string hash = result.grid_hash();
  const fs::path csv = fs::path(cfg.out_dir) / ("sweep_" + hash + ".csv");
  const fs::path side = fs::path(cfg.out_dir) / ("sweep_" + hash + ".json");
  {
    auto os = open_out(csv);
    write_sweep_csv(os, result);
  }
  const auto summary = sweep_summary(result);
  write_json(side, summary);
  std::cout << csv.string() << '\n' << side.string() << '\n';
  if (summary.contains("cells_counted")) {
    std::cout << "cells_counted " << summary["cells_counted"] << "\ncells_cv_positive " << summary["cells_cv_positive"]
              << "\ncells_dv_positive " << summary["cells_dv_positive"] << '\n';
  }
  bool any_failed = false;
  for (const auto& row : result.rows) {
    if (row.failed) {
      any_failed = true;
      std::cerr << "row g0=" << format_double(row.g0) << " failed: " << row.diagnostic << '\n';
    }
  }
  return (any_failed && cfg.strict) ? kExitFail : kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  const auto report = run_verify(cfg);
  std::cout << "# provenance " << provenance_for(cfg, cfg.to_json()).dump() << '\n';
  report.write(std::cout);
  return report.all_pass() ? kExitOk : kExitFail;
}

void print_moments(const qubits::QubitDensityMatrix& rho) {
  const auto m = qubits::spin_moments(rho);
  const char* axes[] = {"x", "y", "z"};
  const char* pairs[] = {"12", "13", "23"};
  for (int a = 0; a < 3; ++a) {
    for (int s = 0; s < 3; ++s) std::cout << "<S_" << axes[a] << s + 1 << "> " << format_double(m.means[a][s]) << '\n';
  }
  for (int a = 0; a < 3; ++a) {
    for (int k = 0; k < 3; ++k) {
      std::cout << "Δ²S_" << axes[a] << "S_" << axes[a] << pairs[k] << ' ' << format_double(m.covariances[a][k]) << '\n';
    }
  }
  std::cout << "G_DV " << format_double(qubits::witness_dv(rho)) << '\n';
}

int cmd_reference(const RunConfig& cfg, const std::string& kind) {
  nlohmann::ordered_json eff;
  eff["command"] = "reference";
  eff["kind"] = kind;
  if (kind == "zbound") {
    eff["samples"] = cfg.samples;
    eff["seed"] = cfg.seed;
  }
  std::cout << "# provenance " << provenance_for(cfg, eff).dump() << '\n';
  if (kind == "ghz") {
    print_moments(qubits::make_reference(qubits::ReferenceKind::ghz));
  } else if (kind == "w") {
    print_moments(qubits::make_reference(qubits::ReferenceKind::w));
  } else if (kind == "mimic") {
    print_moments(qubits::make_reference(qubits::ReferenceKind::mimic_ghz));
  } else if (kind == "zbound") {
    const auto best = qubits::zcov_maximize(cfg.samples, cfg.seed);
    std::cout << "samples " << best.samples << '\n';
    std::cout << "max " << format_double(best.max_value) << '\n';
    for (std::size_t k = 0; k < 4; ++k) {
      static const char* lab[] = {"c00", "c01", "c10", "c11"};
      std::cout << lab[k] << ' ' << format_double(best.argmax.c[k].real()) << ' '
                << format_double(best.argmax.c[k].imag()) << '\n';
    }
    std::cout << "bell_fidelity " << format_double(qubits::bell_fidelity(best.argmax)) << '\n';
  } else {
    throw ConfigError("unknown reference kind '" + kind + "' (expected ghz, w, mimic, zbound)");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven three-pair cavity/qubit simulator and entanglement witnesses"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::map<std::string, std::string> overrides;
  app.add_option("--config", config_path, "flat key = value config file");
  auto value_flag = [&](const std::string& flag, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
  };
  value_flag("--g0", "g0", "pump coupling");
  value_flag("--t-final", "t_final", "final time");
  value_flag("--dt", "dt", "step size (default: drive period / 2000)");
  value_flag("--cutoff", "cutoff", "Fock cutoff, one value or three comma separated");
  value_flag("--method", "method", "stepper: a (RK4) or b (exponential midpoint)");
  value_flag("--grid-g0", "grid_g0", "sweep g0 list: comma separated, start:step:stop ranges allowed");
  value_flag("--grid-t", "grid_t", "sweep time list");
  value_flag("--jobs", "jobs", "parallel sweep rows");
  value_flag("--seed", "seed", "random seed");
  value_flag("--out", "out", "output directory");
  value_flag("--samples", "samples", "random samples for reference zbound");
  value_flag("--sample-spacing", "sample_spacing", "trajectory sample spacing");
  app.add_flag_function("--strict", [&](std::int64_t) { overrides["strict"] = "true"; }, "sweep: exit 1 if any row failed");
  app.add_flag_function("--use-literal-P", [&](std::int64_t) { overrides["use_literal_P"] = "true"; },
                        "verify with the literal projector variant");
  app.add_flag_function("--check-convergence", [&](std::int64_t) { overrides["check_convergence"] = "true"; },
                        "sweep: flag cells whose witnesses move when cutoffs rise by 2");

  auto* evolve_cmd = app.add_subcommand("evolve", "vacuum-initialised trajectory to CSV");
  auto* sweep_cmd = app.add_subcommand("sweep", "(g0, t) grid to CSV plus JSON summary");
  auto* verify_cmd = app.add_subcommand("verify", "invariant suite report");
  auto* ref_cmd = app.add_subcommand("reference", "reference qubit states and the two-qubit z-covariance bound");
  std::string ref_kind;
  ref_cmd->add_option("kind", ref_kind, "ghz | w | mimic | zbound")->required();
  for (auto* sc : {evolve_cmd, sweep_cmd, verify_cmd, ref_cmd}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  try {
    if (config_path) apply_config_file(cfg, *config_path);
    for (const auto& [k, v] : overrides) apply_setting(cfg, k, v);
    validate(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*evolve_cmd) return cmd_evolve(cfg);
    if (*sweep_cmd) return cmd_sweep(cfg);
    if (*verify_cmd) return cmd_verify(cfg);
    if (*ref_cmd) return cmd_reference(cfg, ref_kind);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitUsage;
}
