#pragma once

// Moments, covariances, covariance rates and the tripartite witnesses
//   G_CV  = |<a1 a2 a3>|        - max_i sqrt(<n_i> <n_j n_k>)
//   G'_CV = |<a1 a2 a3>|        - sum_i sqrt(<n_i> <n_j n_k>)
//   G_DV  = |<s-_1 s-_2 s-_3>|  - max_i sqrt(<P_e,i> <P_e,j P_e,k>)
// All expectation values are taken by applying sparse operators to the state
// vector; no dense operator is ever formed.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdc3q/fockspace.hpp"
#include "spdc3q/operators.hpp"

namespace spdc3q {

/// Site pairs in reporting order: (1,2), (1,3), (2,3).
inline constexpr std::array<std::pair<int, int>, 3> kPairs{{{1, 2}, {1, 3}, {2, 3}}};

/// Third site for a pair.
inline constexpr int third_site(int i, int j) { return 6 - i - j; }

/// Splitting order used for tie-breaks: 1|23, 2|13, 3|12.
inline constexpr std::array<std::array<int, 3>, 3> kSplittings{{{1, 2, 3}, {2, 1, 3}, {3, 1, 2}}};

struct SiteOperators {
  SparseOperator a, ad, n, x, p;
  SparseOperator sigma_x, sigma_y, sigma_z, sigma_plus, sigma_minus, excited;
};

/// Every per-site operator needed by the observables, built once per space.
class ObservableOperators {
 public:
  explicit ObservableOperators(SpaceHandle space) : space_(std::move(space)) {
    for (int s = 1; s <= kSites; ++s) {
      auto q = quadratures(space_, s);
      sites_[s - 1] = SiteOperators{annihilation(space_, s),
                                    creation(space_, s),
                                    number(space_, s),
                                    std::move(q.x),
                                    std::move(q.p),
                                    pauli(space_, s, Axis::x),
                                    pauli(space_, s, Axis::y),
                                    pauli(space_, s, Axis::z),
                                    pauli(space_, s, Axis::plus),
                                    pauli(space_, s, Axis::minus),
                                    excited_projector(space_, s)};
    }
    projector_ = parity_projector(space_);
  }

  [[nodiscard]] const SpaceHandle& space() const noexcept { return space_; }
  [[nodiscard]] const SiteOperators& site(int s) const {
    check_site(s, "ObservableOperators::site");
    return sites_[s - 1];
  }
  [[nodiscard]] const SparseOperator& projector() const noexcept { return projector_; }

 private:
  SpaceHandle space_;
  std::array<SiteOperators, kSites> sites_;
  SparseOperator projector_;
};

/// (O_1 O_2 ... O_m) v, rightmost operator applied first.
inline CVector apply_chain(std::initializer_list<const SparseOperator*> ops, const CVector& v) {
  CVector cur = v;
  CVector next;
  for (auto it = std::rbegin(ops); it != std::rend(ops); ++it) {
    (*it)->apply_into(cur, next);
    cur.swap(next);
  }
  return cur;
}

/// <v| O_1 ... O_m |v>.
inline cplx expect(const CVector& v, std::initializer_list<const SparseOperator*> ops) {
  return v.dot(apply_chain(ops, v));
}

inline void require_normalised(const StateVector& s, const char* who) {
  const double dev = std::abs(s.norm_squared() - 1.0);
  if (dev > 1e-6) throw NumericalError(std::string(who) + ": state not normalised (|<psi|psi>-1| = " +
                                       std::to_string(dev) + ")");
}

struct MomentSet {
  std::array<cplx, kSites> a{}, sigma_minus{}, sigma_plus{}, x{}, p{};
  std::array<cplx, kSites> s_x{}, s_y{}, s_z{};
  std::array<cplx, kSites> n{};        // <a^dag_i a_i>
  std::array<cplx, kSites> excited{};  // <s+_i s-_i>
  std::array<cplx, 3> nn{};            // <n_j n_k> per pair (12, 13, 23)
  std::array<cplx, 3> ee{};            // <s+_j s-_j s+_k s-_k> per pair
  cplx a123{};                         // <a1 a2 a3>
  cplx sm123{};                        // <s-_1 s-_2 s-_3>

  /// Pair slot for sites j < k.
  static std::size_t pair_slot(int j, int k) {
    if (j > k) std::swap(j, k);
    return j == 1 ? (k == 2 ? 0u : 1u) : 2u;
  }
};

inline MomentSet moments(const StateVector& state, const ObservableOperators& ops) {
  require_normalised(state, "moments");
  const CVector& v = state.amplitudes;
  MomentSet m;
  for (int s = 1; s <= kSites; ++s) {
    const auto& o = ops.site(s);
    const auto i = static_cast<std::size_t>(s - 1);
    m.a[i] = expect(v, {&o.a});
    m.sigma_minus[i] = expect(v, {&o.sigma_minus});
    m.sigma_plus[i] = expect(v, {&o.sigma_plus});
    m.x[i] = expect(v, {&o.x});
    m.p[i] = expect(v, {&o.p});
    m.s_x[i] = 0.5 * expect(v, {&o.sigma_x});
    m.s_y[i] = 0.5 * expect(v, {&o.sigma_y});
    m.s_z[i] = 0.5 * expect(v, {&o.sigma_z});
    m.n[i] = expect(v, {&o.n});
    m.excited[i] = expect(v, {&o.excited});
  }
  for (std::size_t k = 0; k < kPairs.size(); ++k) {
    const auto [i, j] = kPairs[k];
    m.nn[k] = expect(v, {&ops.site(i).n, &ops.site(j).n});
    m.ee[k] = expect(v, {&ops.site(i).excited, &ops.site(j).excited});
  }
  m.a123 = expect(v, {&ops.site(1).a, &ops.site(2).a, &ops.site(3).a});
  m.sm123 = expect(v, {&ops.site(1).sigma_minus, &ops.site(2).sigma_minus, &ops.site(3).sigma_minus});
  return m;
}

struct WitnessValues {
  double g_cv = 0.0;
  double g_cv_prime = 0.0;
  double g_dv = 0.0;
};

namespace detail {

struct WitnessParts {
  double max_term;
  double sum_term;
};

inline WitnessParts separable_terms(const std::array<cplx, kSites>& single, const std::array<cplx, 3>& pair,
                                    const char* what) {
  constexpr double kNegTol = 1e-12;
  auto occ = [&](cplx v) {
    if (v.real() < -kNegTol) {
      throw NumericalError(std::string(what) + ": negative occupation " + std::to_string(v.real()));
    }
    return std::max(v.real(), 0.0);
  };
  WitnessParts out{0.0, 0.0};
  bool first = true;
  for (const auto& split : kSplittings) {
    const double term = std::sqrt(occ(single[static_cast<std::size_t>(split[0] - 1)]) *
                                  occ(pair[MomentSet::pair_slot(split[1], split[2])]));
    // strict comparison keeps the first splitting on ties
    if (first || term > out.max_term) out.max_term = term;
    first = false;
    out.sum_term += term;
  }
  return out;
}

}  // namespace detail

/// G_CV (max over splittings) and G'_CV (sum over splittings).
inline std::pair<double, double> witness_cv(const MomentSet& m) {
  const auto parts = detail::separable_terms(m.n, m.nn, "witness_cv");
  const double c = std::abs(m.a123);
  return {c - parts.max_term, c - parts.sum_term};
}

inline double witness_dv(const MomentSet& m) {
  const auto parts = detail::separable_terms(m.excited, m.ee, "witness_dv");
  return std::abs(m.sm123) - parts.max_term;
}

inline WitnessValues witnesses(const MomentSet& m) {
  const auto [cv, cvp] = witness_cv(m);
  return {cv, cvp, witness_dv(m)};
}

/// Cross-site covariances Delta^2 O_i O_j = <O_i O_j> - <O_i><O_j>, per pair
/// (12, 13, 23), and same-site variances.
struct CovarianceSet {
  std::array<double, 3> x{}, p{}, s_x{}, s_y{}, s_z{};
  std::array<double, kSites> var_x{}, var_p{}, var_s_z{};
  double max_imag = 0.0;  // largest imaginary part dropped from a cross-site covariance
};

inline CovarianceSet covariances(const StateVector& state, const ObservableOperators& ops) {
  require_normalised(state, "covariances");
  const CVector& v = state.amplitudes;
  CovarianceSet c;
  auto cross = [&](const SparseOperator& oi, const SparseOperator& oj, double scale) {
    const cplx val = scale * (expect(v, {&oi, &oj}) - expect(v, {&oi}) * expect(v, {&oj}));
    c.max_imag = std::max(c.max_imag, std::abs(val.imag()));
    return val.real();
  };
  for (std::size_t k = 0; k < kPairs.size(); ++k) {
    const auto& a = ops.site(kPairs[k].first);
    const auto& b = ops.site(kPairs[k].second);
    c.x[k] = cross(a.x, b.x, 1.0);
    c.p[k] = cross(a.p, b.p, 1.0);
    c.s_x[k] = cross(a.sigma_x, b.sigma_x, 0.25);
    c.s_y[k] = cross(a.sigma_y, b.sigma_y, 0.25);
    c.s_z[k] = cross(a.sigma_z, b.sigma_z, 0.25);
  }
  for (int s = 1; s <= kSites; ++s) {
    const auto& o = ops.site(s);
    const auto i = static_cast<std::size_t>(s - 1);
    const double mx = expect(v, {&o.x}).real();
    const double mp = expect(v, {&o.p}).real();
    const double mz = 0.5 * expect(v, {&o.sigma_z}).real();
    c.var_x[i] = expect(v, {&o.x, &o.x}).real() - mx * mx;
    c.var_p[i] = expect(v, {&o.p, &o.p}).real() - mp * mp;
    c.var_s_z[i] = 0.25 - mz * mz;
  }
  return c;
}

/// Covariance time derivatives, indexed like CovarianceSet's pair arrays.
struct CovarianceRates {
  std::array<double, 3> x{}, p{}, s_x{}, s_y{}, s_z{};
};

/// Exact rates from d/dt <A> = -i <[A, H(t)]> for Hermitian A:
///   d/dt Delta^2 O_i O_j = r(O_i O_j) - r(O_i)<O_j> - <O_i> r(O_j).
inline CovarianceRates covariance_rates_exact(const StateVector& state, const ObservableOperators& ops,
                                              const HamiltonianModel& ham, double t) {
  require_normalised(state, "covariance_rates_exact");
  const CVector& v = state.amplitudes;
  CVector hv;
  ham.apply(t, v, hv);
  // -i <[A,H]> = -i(<A H> - <H A>) = 2 Im((A v)^dag (H v))
  auto rate_of = [&](const CVector& av) { return 2.0 * av.dot(hv).imag(); };
  auto cov_rate = [&](const SparseOperator& oi, const SparseOperator& oj, double scale) {
    const CVector ai = oi.apply(v);
    const CVector aj = oj.apply(v);
    const CVector aij = oi.apply(aj);
    const double mi = v.dot(ai).real();
    const double mj = v.dot(aj).real();
    return scale * (rate_of(aij) - rate_of(ai) * mj - mi * rate_of(aj));
  };
  CovarianceRates r;
  for (std::size_t k = 0; k < kPairs.size(); ++k) {
    const auto& a = ops.site(kPairs[k].first);
    const auto& b = ops.site(kPairs[k].second);
    r.x[k] = cov_rate(a.x, b.x, 1.0);
    r.p[k] = cov_rate(a.p, b.p, 1.0);
    r.s_x[k] = cov_rate(a.sigma_x, b.sigma_x, 0.25);
    r.s_y[k] = cov_rate(a.sigma_y, b.sigma_y, 0.25);
    r.s_z[k] = cov_rate(a.sigma_z, b.sigma_z, 0.25);
  }
  return r;
}

/// Right-hand sides of the closed-form rate expressions, evaluated literally
/// with m_i = 1, hbar = 1, x/p in this library's convention and
/// g_hat(t) = g0 cos(w_d t). These are claims under audit; some terms are
/// complex as written.
struct PrintedRates {
  std::array<cplx, 3> x{}, p{}, s_x{}, s_y_short{}, s_y_long{}, s_z{};
};

inline PrintedRates covariance_rates_printed(const StateVector& state, const ObservableOperators& ops,
                                             const HamiltonianModel& ham, double t) {
  const CVector& v = state.amplitudes;
  const auto& cfg = ham.space()->config();
  const double gh = ham.envelope(t);
  PrintedRates r;
  for (std::size_t k = 0; k < kPairs.size(); ++k) {
    const auto [i, j] = kPairs[k];
    const int l = third_site(i, j);
    const auto& oi = ops.site(i);
    const auto& oj = ops.site(j);
    const auto& ol = ops.site(l);
    const double wi2 = cfg.mode_freqs[i - 1] * cfg.mode_freqs[i - 1];
    const double wj2 = cfg.mode_freqs[j - 1] * cfg.mode_freqs[j - 1];
    const double gi = cfg.rabi_couplings[i - 1];
    const double gj = cfg.rabi_couplings[j - 1];
    const double Wi = cfg.qubit_freqs[i - 1];
    const double Wj = cfg.qubit_freqs[j - 1];

    r.x[k] = expect(v, {&oi.x, &oj.p}) + expect(v, {&oj.x, &oi.p}) - expect(v, {&oi.x}) * expect(v, {&oj.p}) -
             expect(v, {&oi.p}) * expect(v, {&oj.x});

    const cplx I{0.0, 1.0};
    r.p[k] = -(wj2 * expect(v, {&oi.p, &oj.x}) + wi2 * expect(v, {&oi.x, &oj.p})) -
             I * (gj * expect(v, {&oj.sigma_x, &oi.p}) + gi * expect(v, {&oi.sigma_x, &oj.p})) -
             gh * (expect(v, {&oi.p, &oi.x, &ol.x}) + expect(v, {&oj.x, &oj.p, &ol.x})) +
             (wi2 * expect(v, {&oi.x}) + gi * expect(v, {&oi.sigma_x}) + gh * expect(v, {&oj.x, &ol.x})) *
                 expect(v, {&oj.p}) +
             (wj2 * expect(v, {&oj.x}) + gj * expect(v, {&oj.sigma_x}) + gh * expect(v, {&oi.x, &ol.x})) *
                 expect(v, {&oi.p});

    const cplx xy = expect(v, {&oi.sigma_x, &oj.sigma_y});
    const cplx yx = expect(v, {&oi.sigma_y, &oj.sigma_x});
    r.s_x[k] = Wi * xy + Wj * yx;
    r.s_y_short[k] = Wj * yx + Wi * xy;
    r.s_y_long[k] = r.s_y_short[k] - 2.0 * gj * expect(v, {&oj.x, &oi.sigma_y, &oj.sigma_z}) -
                        2.0 * gi * expect(v, {&oi.x, &oi.sigma_z, &oj.sigma_y});
    r.s_z[k] = 0.5 * gj * expect(v, {&oi.sigma_z, &oj.x, &oj.sigma_y}) +
               0.5 * gi * expect(v, {&oi.x, &oi.sigma_y, &oj.sigma_z});
  }
  return r;
}

/// Least-squares fit of the exact rate d/dt <S_y^i S_y^j> over generic states
/// against two candidate term sets:
///   short form: <sy_i sx_j>, <sx_i sy_j>
///   long form:  the above plus <x_j sy_i sz_j>, <x_i sz_i sy_j>
struct SyStructureFit {
  double residual_short = 0.0;  // relative RMS residual
  double residual_long = 0.0;
  std::array<double, 4> coefficients_long{};
  std::array<double, 2> coefficients_short{};
  [[nodiscard]] const char* matches() const {
    constexpr double tol = 1e-8;
    if (residual_long <= tol && residual_short > tol) return "long";
    if (residual_short <= tol) return "short";
    return "neither";
  }
};

inline SyStructureFit fit_sy_rate_structure(const ObservableOperators& ops, const HamiltonianModel& ham, double t,
                                            int i, int j, int n_states, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto dim = static_cast<Eigen::Index>(ham.space()->dim());
  Eigen::MatrixXd design(n_states, 4);
  Eigen::VectorXd target(n_states);
  const auto& oi = ops.site(i);
  const auto& oj = ops.site(j);
  for (int s = 0; s < n_states; ++s) {
    CVector v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) v(k) = cplx{gauss(rng), gauss(rng)};
    v.normalize();
    CVector hv;
    ham.apply(t, v, hv);
    const CVector syy = apply_chain({&oi.sigma_y, &oj.sigma_y}, v);
    target(s) = 0.25 * 2.0 * syy.dot(hv).imag();
    design(s, 0) = expect(v, {&oi.sigma_y, &oj.sigma_x}).real();
    design(s, 1) = expect(v, {&oi.sigma_x, &oj.sigma_y}).real();
    design(s, 2) = expect(v, {&oj.x, &oi.sigma_y, &oj.sigma_z}).real();
    design(s, 3) = expect(v, {&oi.x, &oi.sigma_z, &oj.sigma_y}).real();
  }
  SyStructureFit fit;
  const double scale = std::max(target.norm(), 1e-300);
  {
    const Eigen::MatrixXd d = design.leftCols(2);
    const Eigen::VectorXd c = d.colPivHouseholderQr().solve(target);
    fit.residual_short = (d * c - target).norm() / scale;
    fit.coefficients_short = {c(0), c(1)};
  }
  {
    const Eigen::VectorXd c = design.colPivHouseholderQr().solve(target);
    fit.residual_long = (design * c - target).norm() / scale;
    fit.coefficients_long = {c(0), c(1), c(2), c(3)};
  }
  return fit;
}

/// Expectation values that vanish identically inside the equal-pair-parity
/// subspace. Returns (name, |value|).
inline std::vector<std::pair<std::string, double>> zero_moment_suite(const StateVector& state,
                                                                     const ObservableOperators& ops) {
  const CVector& v = state.amplitudes;
  std::vector<std::pair<std::string, double>> out;
  auto add = [&](std::string name, cplx val) { out.emplace_back(std::move(name), std::abs(val)); };
  for (int s = 1; s <= kSites; ++s) {
    const auto& o = ops.site(s);
    const auto id = std::to_string(s);
    add("<a" + id + ">", expect(v, {&o.a}));
    add("<a" + id + "^dag>", expect(v, {&o.ad}));
    add("<s+" + id + ">", expect(v, {&o.sigma_plus}));
    add("<s-" + id + ">", expect(v, {&o.sigma_minus}));
  }
  for (int i = 1; i <= kSites; ++i) {
    for (int j = 1; j <= kSites; ++j) {
      if (i == j) continue;
      const auto& oi = ops.site(i);
      const auto& oj = ops.site(j);
      const auto ij = std::to_string(i) + std::to_string(j);
      if (i < j) {
        add("<a_i a_j>" + ij, expect(v, {&oi.a, &oj.a}));
        add("<a_i^dag a_j^dag>" + ij, expect(v, {&oi.ad, &oj.ad}));
        add("<s+_i s+_j>" + ij, expect(v, {&oi.sigma_plus, &oj.sigma_plus}));
        add("<s-_i s-_j>" + ij, expect(v, {&oi.sigma_minus, &oj.sigma_minus}));
      }
      add("<a_i^dag a_j>" + ij, expect(v, {&oi.ad, &oj.a}));
      add("<a_i a_j^dag>" + ij, expect(v, {&oi.a, &oj.ad}));
      add("<s+_i s-_j>" + ij, expect(v, {&oi.sigma_plus, &oj.sigma_minus}));
      add("<a_i s+_j>" + ij, expect(v, {&oi.a, &oj.sigma_plus}));
      add("<a_i s-_j>" + ij, expect(v, {&oi.a, &oj.sigma_minus}));
      add("<a_i^dag s+_j>" + ij, expect(v, {&oi.ad, &oj.sigma_plus}));
      add("<a_i^dag s-_j>" + ij, expect(v, {&oi.ad, &oj.sigma_minus}));
      add("<a_i^dag a_i a_j>" + ij, expect(v, {&oi.ad, &oi.a, &oj.a}));
    }
  }
  return out;
}

/// Time-stamped bundle written as one CSV row.
struct ObservableRecord {
  double t = 0.0;
  double g0 = 0.0;
  WitnessValues witness;
  CovarianceSet cov;
  double p_expect = 0.0;
  double norm = 0.0;
};

inline ObservableRecord observe(const StateVector& state, const ObservableOperators& ops, double t, double g0) {
  ObservableRecord rec;
  rec.t = t;
  rec.g0 = g0;
  rec.norm = state.norm_squared();
  rec.witness = witnesses(moments(state, ops));
  rec.cov = covariances(state, ops);
  rec.p_expect = ops.projector().expectation(state.amplitudes).real();
  return rec;
}

}  // namespace spdc3q
