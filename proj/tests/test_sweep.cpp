#include <catch_amalgamated.hpp>

#include <sstream>

#include "spdc3q/sweep.hpp"

using namespace spdc3q;

namespace {

SpaceConfig small() {
  SpaceConfig c;
  c.set_uniform_cutoff(2);
  return c;
}

SweepGrid tiny_grid() {
  SweepGrid g;
  g.g0_values = {0.0, 0.1, 0.3};
  g.times = {0.5, 1.0, 1.5};
  return g;
}

std::string csv_of(const SweepResult& r) {
  std::ostringstream os;
  write_sweep_csv(os, r);
  return os.str();
}

}  // namespace

TEST_CASE("default grid shape") {
  const auto g = SweepGrid::defaults();
  REQUIRE(g.g0_values.size() == 20);
  REQUIRE(g.times.size() == 100);
  CHECK(g.g0_values.front() == Catch::Approx(0.02));
  CHECK(g.g0_values.back() == Catch::Approx(0.40));
  CHECK(g.times.front() == 0.25);
  CHECK(g.times.back() == 25.0);
  const auto p = default_physics();
  CHECK(p.mode_freqs == std::array<double, 3>{1.0, 2.0, 1.0});
  CHECK(p.qubit_freqs == p.mode_freqs);
  CHECK(p.rabi_couplings == std::array<double, 3>{0.01, 0.01, 0.01});
  CHECK(p.cutoffs == std::array<int, 3>{6, 6, 6});
}

TEST_CASE("grid validation") {
  SweepGrid g = tiny_grid();
  g.times = {1.0, 0.5};
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = tiny_grid();
  g.g0_values.clear();
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g = tiny_grid();
  g.g0_values = {-0.1};
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("sweeps are deterministic and independent of parallelism") {
  SweepOptions o;
  const auto a = run_sweep(tiny_grid(), small(), o);
  const auto b = run_sweep(tiny_grid(), small(), o);
  o.jobs = 3;
  const auto c = run_sweep(tiny_grid(), small(), o);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(csv_of(a) == csv_of(c));
  CHECK(a.grid_hash() == c.grid_hash());
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows[1].cells.size() == 3);
  CHECK(a.cell(1, 2).record.t == 1.5);
  CHECK(a.cell(1, 2).record.g0 == 0.1);
}

TEST_CASE("grid hash tracks the configuration") {
  SweepOptions o;
  auto g = tiny_grid();
  const auto a = run_sweep(g, small(), o);
  g.times.back() = 1.75;
  const auto b = run_sweep(g, small(), o);
  CHECK(a.grid_hash() != b.grid_hash());
  CHECK(a.grid_hash().size() == 16);
}

TEST_CASE("a failed trajectory marks its whole row") {
  SweepOptions o;
  o.norm_tolerance_per_time = 1e-30;
  o.dt = 0.05;
  SweepGrid g = tiny_grid();
  g.g0_values = {0.3};
  const auto r = run_sweep(g, small(), o);
  REQUIRE(r.rows[0].failed);
  CHECK_FALSE(r.rows[0].diagnostic.empty());
  for (const auto& c : r.rows[0].cells) CHECK(c.failed);
  CHECK_THROWS_AS(compare_regimes(r), std::invalid_argument);
  const auto summary = sweep_summary(r);
  CHECK(summary["failed_rows"] == 1);
  CHECK(summary.contains("error"));
}

TEST_CASE("compare_regimes edge cases") {
  SweepOptions o;
  SweepGrid g = tiny_grid();
  g.g0_values = {0.0};
  SpaceConfig c = small();
  c.rabi_couplings = {0.0, 0.0, 0.0};
  const auto r = run_sweep(g, c, o);
  const auto s = compare_regimes(r);
  CHECK(s.cells_cv_positive == 0);
  CHECK(s.cells_dv_positive == 0);
  CHECK(s.cells_counted == 3);
  CHECK(s.ratio == 1.0);
  CHECK_THROWS_AS(compare_regimes(SweepResult{}), std::invalid_argument);
}

TEST_CASE("convergence flags compare against a finer cutoff") {
  SweepOptions o;
  o.check_convergence = true;
  o.convergence_tolerance = 0.0;
  SweepGrid g = tiny_grid();
  g.g0_values = {0.3};
  const auto r = run_sweep(g, small(), o);
  for (const auto& cell : r.rows[0].cells) {
    CHECK(std::isfinite(cell.convergence_shift));
    CHECK(cell.unconverged == (cell.convergence_shift > 0.0));
  }
  const auto summary = sweep_summary(r);
  CHECK(summary["provenance"]["cutoffs"] == std::array<int, 3>{2, 2, 2});
  CHECK(summary["provenance"].contains("method"));
  CHECK(summary["provenance"].contains("dt"));
}

TEST_CASE("sweep CSV has the fixed column contract") {
  SweepOptions o;
  SweepGrid g = tiny_grid();
  g.g0_values = {0.1};
  g.times = {1.0};
  const auto text = csv_of(run_sweep(g, small(), o));
  std::istringstream in(text);
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK_FALSE(std::getline(in, extra));
  CHECK(header.rfind("t,g0,G_CV,G_CV_prime,G_DV,", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') == 21);
  CHECK(std::count(row.begin(), row.end(), ',') == 21);
}
