#include <catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "oracle.hpp"
#include "spdc3q/dynamics.hpp"
#include "spdc3q/operators.hpp"

using namespace spdc3q;

namespace {

/// Fourth-order Magnus propagation with dense exponentials (two-point Gauss).
CVector magnus4(const oracle::Embedder& e, const SpaceConfig& c, const CVector& psi0, double t_final, int steps) {
  const double h = t_final / steps;
  const double r = std::sqrt(3.0) / 6.0;
  CVector psi = psi0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    auto H = [&](double s) {
      return e.hamiltonian(c.mode_freqs, c.qubit_freqs, c.rabi_couplings, c.pump_coupling, c.drive_freq(), s);
    };
    const oracle::Dense h1 = H(t + (0.5 - r) * h), h2 = H(t + (0.5 + r) * h);
    const oracle::Dense omega =
        -oracle::cplx(0, 1) * h * 0.5 * (h1 + h2) + (std::sqrt(3.0) / 12.0) * h * h * (h1 * h2 - h2 * h1);  // A = -iH: [A2, A1] = [H1, H2]
    psi = omega.exp() * psi;
  }
  return psi;
}

}  // namespace

TEST_CASE("default step resolves the drive") {
  CHECK(default_step(4.0) == Catch::Approx(2.0 * std::numbers::pi / 4.0 / 2000.0));
  const auto ts = uniform_times(1.0, 0.25);
  REQUIRE(ts.size() == 5);
  CHECK(ts.back() == 1.0);
}

TEST_CASE("both steppers match a dense Magnus reference") {
  SpaceConfig c;
  c.set_uniform_cutoff(1);
  c.pump_coupling = 0.3;
  c.rabi_couplings = {0.05, 0.02, 0.04};
  const auto sp = build_space(c);
  const auto h = build_hamiltonian(sp);
  const oracle::Embedder e{{1, 1, 1}};
  const CVector ref = magnus4(e, c, vacuum_state(sp).amplitudes, 2.0, 2000);
  auto error = [&](Method m, double dt) {
    EvolutionSpec spec;
    spec.t_final = 2.0;
    spec.sample_times = {2.0};
    spec.method = m;
    spec.dt = dt;
    StateVector last = vacuum_state(sp);
    const auto r = evolve(h, spec, vacuum_state(sp), [&](double, const StateVector& s) { last = s; });
    REQUIRE(r.ok);
    return (last.amplitudes - ref).cwiseAbs().maxCoeff();
  };
  const double dt = default_step(c.drive_freq());
  CHECK(error(Method::rk4, dt) < 1e-9);
  // exponential midpoint is second order
  const double e1 = error(Method::midpoint_exp, dt), e2 = error(Method::midpoint_exp, dt / 2);
  CHECK(e1 < 1e-6);
  CHECK(e1 / e2 == Catch::Approx(4.0).epsilon(0.05));
}

TEST_CASE("without couplings a basis state only picks up its phase") {
  SpaceConfig c;
  c.set_uniform_cutoff(3);
  c.pump_coupling = 0.0;
  c.rabi_couplings = {0.0, 0.0, 0.0};
  const auto sp = build_space(c);
  const auto h = build_hamiltonian(sp);
  const BasisIndex b{{1, 0, 2}, {1, 0, 1}};
  // E = sum w n + sum (W/2)(+-1)
  const double energy = 1.0 * 1 + 1.0 * 2 + 0.5 * 1.0 - 0.5 * 2.0 + 0.5 * 1.0;
  for (Method m : {Method::rk4, Method::midpoint_exp}) {
    EvolutionSpec spec;
    spec.t_final = 3.0;
    spec.sample_times = {3.0};
    spec.method = m;
    StateVector last = vacuum_state(sp);
    evolve(h, spec, basis_state(sp, b), [&](double, const StateVector& s) { last = s; });
    CHECK(std::abs(last.amplitude(b) - std::exp(cplx{0.0, -energy * 3.0})) < 1e-10);
  }
}

TEST_CASE("steppers agree at a moderate truncation") {
  SpaceConfig c;
  c.set_uniform_cutoff(3);
  const auto sp = build_space(c);
  const auto h = build_hamiltonian(sp);
  StateVector a = vacuum_state(sp), b = vacuum_state(sp);
  EvolutionSpec spec;
  spec.t_final = 2.0;
  spec.sample_times = {2.0};
  evolve(h, spec, vacuum_state(sp), [&](double, const StateVector& s) { a = s; });
  spec.method = Method::midpoint_exp;
  evolve(h, spec, vacuum_state(sp), [&](double, const StateVector& s) { b = s; });
  CHECK(1.0 - std::abs(overlap(a, b)) < 1e-10);
}

TEST_CASE("drift beyond tolerance marks the trajectory failed") {
  SpaceConfig c;
  c.set_uniform_cutoff(2);
  const auto sp = build_space(c);
  const auto h = build_hamiltonian(sp).with_pump_coupling(0.5);
  EvolutionSpec spec;
  spec.t_final = 5.0;
  spec.sample_times = uniform_times(5.0, 0.5);
  spec.dt = 0.05;
  spec.norm_tolerance_per_time = 1e-15;
  const auto r = evolve(h, spec, vacuum_state(sp));
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.diagnostic.empty());
  CHECK(r.times.size() < spec.sample_times.size());
  CHECK_THROWS_AS(leakage_report(r), std::logic_error);
}

TEST_CASE("evolve rejects bad inputs") {
  SpaceConfig c;
  c.set_uniform_cutoff(1);
  const auto sp = build_space(c);
  const auto h = build_hamiltonian(sp);
  EvolutionSpec spec;
  spec.t_final = 1.0;
  spec.sample_times = {1.0};
  StateVector bad = vacuum_state(sp);
  bad.amplitudes *= 2.0;
  CHECK_THROWS(evolve(h, spec, bad));
  SpaceConfig d;
  d.set_uniform_cutoff(2);
  CHECK_THROWS(evolve(h, spec, vacuum_state(build_space(d))));
  spec.sample_times = {0.5, 0.25};
  CHECK_THROWS(evolve(h, spec, vacuum_state(sp)));
}

TEST_CASE("trajectories are deterministic and report leakage") {
  SpaceConfig c;
  c.set_uniform_cutoff(2);
  const auto sp = build_space(c);
  const auto h = build_hamiltonian(sp).with_pump_coupling(0.4);
  EvolutionSpec spec;
  spec.t_final = 3.0;
  spec.sample_times = uniform_times(3.0, 1.0);
  spec.leakage_threshold = 1e-12;
  std::vector<CVector> first, second;
  const auto r1 = evolve(h, spec, vacuum_state(sp), [&](double, const StateVector& s) { first.push_back(s.amplitudes); });
  evolve(h, spec, vacuum_state(sp), [&](double, const StateVector& s) { second.push_back(s.amplitudes); });
  REQUIRE(first.size() == second.size());
  for (std::size_t k = 0; k < first.size(); ++k) CHECK(first[k] == second[k]);
  CHECK_FALSE(r1.warnings.empty());
  const auto leak = leakage_report(r1);
  CHECK(leak[0] > 0.0);
  CHECK(top_level_population(vacuum_state(sp)) == std::array<double, 3>{0.0, 0.0, 0.0});
}
