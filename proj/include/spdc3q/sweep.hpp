#pragma once

// (g0, t) parameter sweeps. One trajectory per g0 row, observables harvested
// at the sample times; rows are independent work units.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "spdc3q/dynamics.hpp"
#include "spdc3q/io.hpp"
#include "spdc3q/observables.hpp"
#include "spdc3q/operators.hpp"

namespace spdc3q {

struct SweepGrid {
  std::vector<double> g0_values;
  std::vector<double> times;

  /// g0 in {0.02, ..., 0.40}, t in {0.25, ..., 25}.
  static SweepGrid defaults() {
    SweepGrid g;
    for (int k = 1; k <= 20; ++k) g.g0_values.push_back(0.02 * k);
    for (int k = 1; k <= 100; ++k) g.times.push_back(0.25 * k);
    return g;
  }

  void validate() const {
    if (g0_values.empty() || times.empty()) throw ConfigError("sweep grid must have at least one g0 and one t");
    for (std::size_t k = 0; k < g0_values.size(); ++k) {
      if (!(g0_values[k] >= 0.0)) throw ConfigError("grid g0 values must be >= 0");
      if (k && !(g0_values[k] > g0_values[k - 1])) throw ConfigError("grid g0 values must be strictly increasing");
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
      if (!(times[k] >= 0.0)) throw ConfigError("grid times must be >= 0");
      if (k && !(times[k] > times[k - 1])) throw ConfigError("grid times must be strictly increasing");
    }
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["g0"] = g0_values;
    j["t"] = times;
    return j;
  }
};

/// Default physics: w = (1, 2, 1), W_i = w_i, g_i = 0.01, N_i = 6.
inline SpaceConfig default_physics() { return SpaceConfig{}; }

struct SweepOptions {
  Method method = Method::rk4;
  double dt = 0.0;  // <= 0 picks default_step
  int jobs = 1;
  double norm_tolerance_per_time = 1e-9;
  double leakage_threshold = 1e-4;
  bool check_convergence = false;
  int convergence_increment = 2;
  double convergence_tolerance = 1e-4;
};

struct SweepCell {
  ObservableRecord record;
  bool failed = false;
  bool leakage_warning = false;
  bool unconverged = false;
  double convergence_shift = std::numeric_limits<double>::quiet_NaN();
};

struct SweepRow {
  double g0 = 0.0;
  bool failed = false;
  std::string diagnostic;
  std::vector<std::string> warnings;
  std::array<double, kSites> peak_leakage{};
  std::vector<SweepCell> cells;
};

struct SweepResult {
  SweepGrid grid;
  SpaceConfig physics;
  SweepOptions options;
  double dt = 0.0;
  std::vector<SweepRow> rows;

  [[nodiscard]] const SweepCell& cell(std::size_t row, std::size_t col) const { return rows.at(row).cells.at(col); }

  [[nodiscard]] nlohmann::ordered_json effective_config() const {
    nlohmann::ordered_json j;
    j["physics"] = space_config_json(physics);
    j["grid"] = grid.to_json();
    j["method"] = method_name(options.method);
    j["dt"] = dt;
    j["check_convergence"] = options.check_convergence;
    return j;
  }

  /// Hash naming the output files.
  [[nodiscard]] std::string grid_hash() const { return hex16(fnv1a(canonical_text(effective_config()))); }
};

namespace detail {

struct RowTrajectory {
  TrajectoryResult traj;
  std::vector<ObservableRecord> records;
  std::vector<std::array<double, kSites>> leakage;
};

inline RowTrajectory run_row(const HamiltonianModel& ham, const ObservableOperators& ops, double g0,
                             const SweepGrid& grid, const SweepOptions& opt) {
  EvolutionSpec spec;
  spec.t_final = grid.times.back();
  spec.sample_times = grid.times;
  spec.method = opt.method;
  spec.dt = opt.dt;
  spec.norm_tolerance_per_time = opt.norm_tolerance_per_time;
  spec.leakage_threshold = opt.leakage_threshold;
  RowTrajectory out;
  const HamiltonianModel row_ham = ham.with_pump_coupling(g0);
  out.traj = evolve(row_ham, spec, vacuum_state(ops.space()), [&](double t, const StateVector& s) {
    out.records.push_back(observe(s, ops, t, g0));
    out.leakage.push_back(top_level_population(s));
  });
  return out;
}

template <class Fn>
void parallel_rows(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n <= 1) {
    for (std::size_t r = 0; r < n; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(std::min(workers, n));
  for (std::size_t w = 0; w < errors.size(); ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t r = next++; r < n; r = next++) fn(r);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

inline SweepResult run_sweep(const SweepGrid& grid, const SpaceConfig& physics, const SweepOptions& opt) {
  grid.validate();
  physics.validate();
  SweepResult result;
  result.grid = grid;
  result.physics = physics;
  result.options = opt;
  result.dt = opt.dt > 0.0 ? opt.dt : default_step(physics.drive_freq());
  result.rows.resize(grid.g0_values.size());

  const SpaceHandle space = build_space(physics);
  const HamiltonianModel ham = build_hamiltonian(space);
  const ObservableOperators ops(space);

  std::optional<SpaceHandle> fine_space;
  std::optional<HamiltonianModel> fine_ham;
  std::optional<ObservableOperators> fine_ops;
  if (opt.check_convergence) {
    SpaceConfig fine = physics;
    for (auto& c : fine.cutoffs) c += opt.convergence_increment;
    fine_space = build_space(fine);
    fine_ham.emplace(build_hamiltonian(*fine_space));
    fine_ops.emplace(*fine_space);
  }

  detail::parallel_rows(grid.g0_values.size(), opt.jobs, [&](std::size_t r) {
    const double g0 = grid.g0_values[r];
    SweepRow row;
    row.g0 = g0;
    auto main = detail::run_row(ham, ops, g0, grid, opt);
    row.failed = !main.traj.ok;
    row.diagnostic = main.traj.diagnostic;
    row.warnings = main.traj.warnings;
    row.peak_leakage = main.traj.peak_leakage;

    std::optional<detail::RowTrajectory> fine;
    if (opt.check_convergence && !row.failed) fine = detail::run_row(*fine_ham, *fine_ops, g0, grid, opt);

    row.cells.resize(grid.times.size());
    for (std::size_t c = 0; c < grid.times.size(); ++c) {
      SweepCell& cell = row.cells[c];
      cell.failed = row.failed;
      if (c < main.records.size()) {
        cell.record = main.records[c];
        for (double l : main.leakage[c]) cell.leakage_warning = cell.leakage_warning || l > opt.leakage_threshold;
      } else {
        cell.record.t = grid.times[c];
        cell.record.g0 = g0;
      }
      if (fine && c < fine->records.size()) {
        const auto& a = cell.record.witness;
        const auto& b = fine->records[c].witness;
        cell.convergence_shift = std::max({std::abs(a.g_cv - b.g_cv), std::abs(a.g_cv_prime - b.g_cv_prime),
                                           std::abs(a.g_dv - b.g_dv)});
        cell.unconverged = cell.convergence_shift > opt.convergence_tolerance;
      }
      if (fine && !fine->traj.ok) cell.unconverged = true;
    }
    result.rows[r] = std::move(row);
  });
  return result;
}

struct RegimeSummary {
  std::size_t cells_cv_positive = 0;
  std::size_t cells_dv_positive = 0;
  std::size_t cells_counted = 0;
  double ratio = 0.0;  // dv / cv; +inf when cv is 0 and dv is not, 1 when both are 0
};

inline RegimeSummary compare_regimes(const SweepResult& result) {
  RegimeSummary s;
  for (const auto& row : result.rows) {
    for (const auto& cell : row.cells) {
      if (cell.failed) continue;
      ++s.cells_counted;
      if (cell.record.witness.g_cv > 0.0) ++s.cells_cv_positive;
      if (cell.record.witness.g_dv > 0.0) ++s.cells_dv_positive;
    }
  }
  if (s.cells_counted == 0) throw std::invalid_argument("compare_regimes: sweep has no usable cells");
  if (s.cells_cv_positive > 0) {
    s.ratio = static_cast<double>(s.cells_dv_positive) / static_cast<double>(s.cells_cv_positive);
  } else {
    s.ratio = s.cells_dv_positive > 0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return s;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  write_csv_header(os, observable_columns());
  for (const auto& row : result.rows) {
    for (const auto& cell : row.cells) write_csv_row(os, observable_values(cell.record));
  }
}

inline nlohmann::ordered_json sweep_summary(const SweepResult& result) {
  nlohmann::ordered_json j;
  const auto cfg = result.effective_config();
  j["provenance"] = provenance_block(cfg, result.options.method, result.dt, result.physics.cutoffs);
  j["grid_hash"] = result.grid_hash();
  std::size_t failed_rows = 0, leak_cells = 0, unconverged_cells = 0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    nlohmann::ordered_json r;
    r["g0"] = row.g0;
    r["failed"] = row.failed;
    if (row.failed) {
      ++failed_rows;
      r["diagnostic"] = row.diagnostic;
    }
    r["peak_leakage"] = row.peak_leakage;
    r["warnings"] = row.warnings;
    std::size_t leak = 0, unconv = 0;
    for (const auto& c : row.cells) {
      leak += c.leakage_warning;
      unconv += c.unconverged;
    }
    r["leakage_cells"] = leak;
    r["unconverged_cells"] = unconv;
    leak_cells += leak;
    unconverged_cells += unconv;
    rows.push_back(std::move(r));
  }
  try {
    const auto s = compare_regimes(result);
    j["cells_cv_positive"] = s.cells_cv_positive;
    j["cells_dv_positive"] = s.cells_dv_positive;
    j["cells_counted"] = s.cells_counted;
    j["ratio_dv_cv"] = std::isfinite(s.ratio) ? nlohmann::ordered_json(s.ratio) : nlohmann::ordered_json("inf");
  } catch (const std::invalid_argument& e) {
    j["error"] = e.what();
  }
  j["failed_rows"] = failed_rows;
  j["leakage_cells"] = leak_cells;
  j["unconverged_cells"] = unconverged_cells;
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace spdc3q
