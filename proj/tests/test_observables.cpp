#include <catch_amalgamated.hpp>

#include <random>

#include "spdc3q/dynamics.hpp"
#include "spdc3q/observables.hpp"
#include "spdc3q/qubitstates.hpp"

using namespace spdc3q;

namespace {

SpaceHandle space_n(int n) {
  SpaceConfig c;
  c.set_uniform_cutoff(n);
  return build_space(c);
}

StateVector superpose(const SpaceHandle& sp, std::initializer_list<std::pair<BasisIndex, cplx>> terms) {
  StateVector s{sp, CVector::Zero(static_cast<Eigen::Index>(sp->dim()))};
  for (const auto& [b, c] : terms) s.amplitudes(static_cast<Eigen::Index>(sp->flat(b))) += c;
  return s;
}

StateVector random_parity_state(const SpaceHandle& sp, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  StateVector s{sp, CVector::Zero(static_cast<Eigen::Index>(sp->dim()))};
  for (std::size_t k = 0; k < sp->dim(); ++k) {
    if (equal_pair_parity(sp->unflat(k))) s.amplitudes(static_cast<Eigen::Index>(k)) = cplx{g(rng), g(rng)};
  }
  s.amplitudes.normalize();
  return s;
}

}  // namespace

TEST_CASE("G_CV on sqrt(0.9)|000> + sqrt(0.1)|111>") {
  const auto sp = space_n(3);
  const ObservableOperators ops(sp);
  const auto s = superpose(sp, {{BasisIndex{}, std::sqrt(0.9)}, {BasisIndex{{1, 1, 1}, {0, 0, 0}}, std::sqrt(0.1)}});
  const auto w = witnesses(moments(s, ops));
  // |<a1a2a3>| = 0.3, each splitting term sqrt(0.1 * 0.1) = 0.1
  CHECK(w.g_cv == Catch::Approx(0.2).margin(1e-14));
  CHECK(w.g_cv_prime == Catch::Approx(0.0).margin(1e-14));
  CHECK(w.g_dv == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("G_CV of |111> is -1") {
  const auto sp = space_n(2);
  const ObservableOperators ops(sp);
  const auto w = witnesses(moments(basis_state(sp, BasisIndex{{1, 1, 1}, {0, 0, 0}}), ops));
  CHECK(w.g_cv == Catch::Approx(-1.0).margin(1e-14));
  CHECK(w.g_cv_prime == Catch::Approx(-3.0).margin(1e-14));
}

TEST_CASE("G_DV on embedded GHZ and W qubit states matches the 8x8 evaluation") {
  const auto sp = space_n(1);
  const ObservableOperators ops(sp);
  const double r2 = 1.0 / std::sqrt(2.0), r3 = 1.0 / std::sqrt(3.0);
  const auto ghz = superpose(sp, {{BasisIndex{}, r2}, {BasisIndex{{0, 0, 0}, {1, 1, 1}}, r2}});
  const auto w = superpose(sp, {{BasisIndex{{0, 0, 0}, {1, 0, 0}}, r3},
                                {BasisIndex{{0, 0, 0}, {0, 1, 0}}, r3},
                                {BasisIndex{{0, 0, 0}, {0, 0, 1}}, r3}});
  CHECK(witnesses(moments(ghz, ops)).g_dv == Catch::Approx(0.0).margin(1e-14));
  CHECK(witnesses(moments(w, ops)).g_dv == Catch::Approx(0.0).margin(1e-14));
  CHECK(witnesses(moments(ghz, ops)).g_dv ==
        Catch::Approx(qubits::witness_dv(qubits::make_reference(qubits::ReferenceKind::ghz))).margin(1e-14));

  // random qubit-only states: both implementations agree
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    qubits::Vector8 psi;
    for (int k = 0; k < 8; ++k) psi(k) = cplx{g(rng), g(rng)};
    psi.normalize();
    StateVector s{sp, CVector::Zero(static_cast<Eigen::Index>(sp->dim()))};
    for (int k = 0; k < 8; ++k) {
      const BasisIndex b{{0, 0, 0}, {(k >> 2) & 1, (k >> 1) & 1, k & 1}};
      s.amplitudes(static_cast<Eigen::Index>(sp->flat(b))) = psi(k);
    }
    CHECK(witnesses(moments(s, ops)).g_dv == Catch::Approx(qubits::witness_dv(qubits::pure(psi))).margin(1e-13));
  }
}

TEST_CASE("G_CV >= G'_CV on random states") {
  const auto sp = space_n(2);
  const ObservableOperators ops(sp);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 25; ++k) {
    const auto w = witnesses(moments(random_parity_state(sp, rng), ops));
    CHECK(w.g_cv >= w.g_cv_prime);
  }
}

TEST_CASE("covariances of a two-mode pair state") {
  const auto sp = space_n(2);
  const ObservableOperators ops(sp);
  const double r2 = 1.0 / std::sqrt(2.0);
  const auto s = superpose(sp, {{BasisIndex{}, r2}, {BasisIndex{{1, 1, 0}, {0, 0, 0}}, r2}});
  const auto c = covariances(s, ops);
  CHECK(c.x[0] == Catch::Approx(0.5).margin(1e-14));
  CHECK(c.p[0] == Catch::Approx(-0.5).margin(1e-14));
  CHECK(c.x[1] == Catch::Approx(0.0).margin(1e-14));
  CHECK(c.s_z[0] == Catch::Approx(0.0).margin(1e-14));
  CHECK(c.var_x[2] == Catch::Approx(0.5).margin(1e-14));
  CHECK(c.max_imag < 1e-15);
}

TEST_CASE("qubit z covariance of a Bell pair is 1/4") {
  const auto sp = space_n(1);
  const ObservableOperators ops(sp);
  const double r2 = 1.0 / std::sqrt(2.0);
  const auto s = superpose(sp, {{BasisIndex{}, r2}, {BasisIndex{{0, 0, 0}, {0, 1, 1}}, r2}});
  const auto c = covariances(s, ops);
  CHECK(c.s_z[2] == Catch::Approx(0.25).margin(1e-15));
  CHECK(c.s_z[0] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("exact covariance rates match finite differences") {
  SpaceConfig cfg;
  cfg.set_uniform_cutoff(3);
  const auto sp = build_space(cfg);
  const ObservableOperators ops(sp);
  const auto h = build_hamiltonian(sp);
  const double tc = 2.0, dh = 1e-3;
  EvolutionSpec spec;
  spec.t_final = tc + dh;
  spec.sample_times = {tc - dh, tc, tc + dh};
  std::vector<StateVector> st;
  evolve(h, spec, vacuum_state(sp), [&](double, const StateVector& s) { st.push_back(s); });
  REQUIRE(st.size() == 3);
  const auto lo = covariances(st[0], ops), hi = covariances(st[2], ops);
  const auto r = covariance_rates_exact(st[1], ops, h, tc);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs((hi.x[k] - lo.x[k]) / (2 * dh) - r.x[k]) < 1e-6);
    CHECK(std::abs((hi.p[k] - lo.p[k]) / (2 * dh) - r.p[k]) < 1e-6);
    CHECK(std::abs((hi.s_x[k] - lo.s_x[k]) / (2 * dh) - r.s_x[k]) < 1e-6);
    CHECK(std::abs((hi.s_y[k] - lo.s_y[k]) / (2 * dh) - r.s_y[k]) < 1e-6);
    CHECK(std::abs((hi.s_z[k] - lo.s_z[k]) / (2 * dh) - r.s_z[k]) < 1e-6);
  }
}

TEST_CASE("S_y rate needs the Rabi correction terms") {
  SpaceConfig cfg;
  cfg.set_uniform_cutoff(2);
  cfg.rabi_couplings = {0.01, 0.02, 0.03};
  const auto sp = build_space(cfg);
  const ObservableOperators ops(sp);
  const auto h = build_hamiltonian(sp);
  const auto fit = fit_sy_rate_structure(ops, h, 0.7, 1, 3, 16, 5);
  CHECK(fit.residual_long < 1e-10);
  CHECK(fit.residual_short > 1e-6);
  CHECK(std::string(fit.matches()) == "long");
  // hand-derived: W_j/4, W_i/4, -g_j/sqrt2, -g_i/sqrt2 for (i, j) = (1, 3)
  CHECK(fit.coefficients_long[0] == Catch::Approx(0.25).margin(1e-10));
  CHECK(fit.coefficients_long[1] == Catch::Approx(0.25).margin(1e-10));
  CHECK(fit.coefficients_long[2] == Catch::Approx(-0.03 / std::sqrt(2.0)).margin(1e-10));
  CHECK(fit.coefficients_long[3] == Catch::Approx(-0.01 / std::sqrt(2.0)).margin(1e-10));
}

TEST_CASE("zero-moment suite vanishes inside the parity subspace only") {
  const auto sp = space_n(2);
  const ObservableOperators ops(sp);
  std::mt19937_64 rng(2);
  const auto good = random_parity_state(sp, rng);
  double worst = 0.0;
  for (const auto& [name, v] : zero_moment_suite(good, ops)) worst = std::max(worst, v);
  CHECK(worst < 1e-14);
  const double r2 = 1.0 / std::sqrt(2.0);
  const auto bad = superpose(sp, {{BasisIndex{}, r2}, {BasisIndex{{1, 0, 0}, {0, 0, 0}}, r2}});
  worst = 0.0;
  for (const auto& [name, v] : zero_moment_suite(bad, ops)) worst = std::max(worst, v);
  CHECK(worst == Catch::Approx(0.5));
}

TEST_CASE("observe fills the record") {
  const auto sp = space_n(2);
  const ObservableOperators ops(sp);
  const auto rec = observe(vacuum_state(sp), ops, 1.5, 0.2);
  CHECK(rec.t == 1.5);
  CHECK(rec.g0 == 0.2);
  CHECK(rec.p_expect == 1.0);
  CHECK(rec.norm == 1.0);
  CHECK(rec.witness.g_cv == 0.0);
  CHECK(rec.witness.g_dv == 0.0);
}

TEST_CASE("moments reject unnormalised states") {
  const auto sp = space_n(1);
  const ObservableOperators ops(sp);
  auto s = vacuum_state(sp);
  s.amplitudes *= 1.1;
  CHECK_THROWS_AS(moments(s, ops), NumericalError);
}
