#pragma once

// Reference three-qubit states (GHZ, W, and a separable mixture meant to
// reproduce GHZ's first and second spin moments), their spin moments, and
// the pure two-qubit S_z covariance bound search.
//
// Qubit 1 is the most significant bit of the dense index; bit value 1 = |e>.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdc3q/fockspace.hpp"

namespace spdc3q::qubits {

using Matrix8 = Eigen::Matrix<cplx, 8, 8>;
using Vector8 = Eigen::Matrix<cplx, 8, 1>;
using Matrix2 = Eigen::Matrix<cplx, 2, 2>;

enum class ReferenceKind { ghz, w, mimic_ghz, maximally_mixed };

inline const char* kind_name(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::ghz: return "ghz";
    case ReferenceKind::w: return "w";
    case ReferenceKind::mimic_ghz: return "mimic";
    case ReferenceKind::maximally_mixed: return "mixed";
  }
  return "?";
}

/// One weighted product-state projector |l1><l1| x |l2><l2| x |l3><l3|.
struct ProductTerm {
  double weight;
  std::array<int, 3> levels;
};

struct QubitDensityMatrix {
  Matrix8 rho = Matrix8::Zero();
  /// Explicit separable decomposition, when the state was built from one.
  std::vector<ProductTerm> product_decomposition;

  [[nodiscard]] bool has_separable_certificate() const { return !product_decomposition.empty(); }

  void validate() const {
    if (std::abs(rho.trace() - cplx{1.0, 0.0}) > 1e-12) throw NumericalError("density matrix trace != 1");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw NumericalError("density matrix not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix8> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-10) throw NumericalError("density matrix has negative eigenvalue");
  }

  [[nodiscard]] Eigen::Matrix<double, 8, 1> eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix8> es(rho);
    return es.eigenvalues();
  }
};

inline int dense_index(const std::array<int, 3>& levels) { return levels[0] * 4 + levels[1] * 2 + levels[2]; }

inline QubitDensityMatrix pure(const Vector8& psi) {
  QubitDensityMatrix out;
  out.rho = psi * psi.adjoint();
  return out;
}

inline QubitDensityMatrix from_products(std::vector<ProductTerm> terms) {
  QubitDensityMatrix out;
  for (const auto& t : terms) {
    const int k = dense_index(t.levels);
    out.rho(k, k) += t.weight;
  }
  out.product_decomposition = std::move(terms);
  return out;
}

/// The 1/12-weighted mixture: for each site s, the level of s is uniform and
/// independent while the other two sites share a common level.
inline std::vector<ProductTerm> mimic_ghz_terms() {
  std::vector<ProductTerm> terms;
  for (int free_site = 0; free_site < 3; ++free_site) {
    for (int own = 0; own < 2; ++own) {
      for (int shared = 0; shared < 2; ++shared) {
        std::array<int, 3> lv{shared, shared, shared};
        lv[static_cast<std::size_t>(free_site)] = own;
        terms.push_back({1.0 / 12.0, lv});
      }
    }
  }
  return terms;
}

inline QubitDensityMatrix make_reference(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::ghz: {
      // entries set directly so the moments come out exact
      QubitDensityMatrix out;
      out.rho(0, 0) = out.rho(7, 7) = out.rho(0, 7) = out.rho(7, 0) = 0.5;
      return out;
    }
    case ReferenceKind::w: {
      Vector8 v = Vector8::Zero();
      v(4) = v(2) = v(1) = 1.0 / std::sqrt(3.0);
      return pure(v);
    }
    case ReferenceKind::mimic_ghz:
      return from_products(mimic_ghz_terms());
    case ReferenceKind::maximally_mixed: {
      std::vector<ProductTerm> terms;
      for (int k = 0; k < 8; ++k) terms.push_back({1.0 / 8.0, {(k >> 2) & 1, (k >> 1) & 1, k & 1}});
      return from_products(std::move(terms));
    }
  }
  throw std::invalid_argument("unknown reference kind");
}

enum class SpinAxis { x, y, z };

/// Pauli matrix in the {|g>, |e>} basis (index 0 = g).
inline Matrix2 pauli2(SpinAxis a) {
  Matrix2 m = Matrix2::Zero();
  switch (a) {
    case SpinAxis::x: m(0, 1) = m(1, 0) = 1.0; break;
    case SpinAxis::y: m(1, 0) = cplx{0.0, -1.0}; m(0, 1) = cplx{0.0, 1.0}; break;
    case SpinAxis::z: m(0, 0) = -1.0; m(1, 1) = 1.0; break;
  }
  return m;
}

/// Embeds a single-qubit operator at site (1..3) of the 8-dim space.
inline Matrix8 embed(const Matrix2& op, int site) {
  check_site(site, "qubits::embed");
  Matrix8 out = Matrix8::Zero();
  const int shift = 3 - site;
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      if ((r & ~(1 << shift)) != (c & ~(1 << shift))) continue;
      out(r, c) = op((r >> shift) & 1, (c >> shift) & 1);
    }
  }
  return out;
}

inline Matrix8 spin_op(SpinAxis a, int site) { return 0.5 * embed(pauli2(a), site); }

struct SpinMoments {
  // means[axis][site-1]
  std::array<std::array<double, 3>, 3> means{};
  // covariances[axis][pair slot (12, 13, 23)]
  std::array<std::array<double, 3>, 3> covariances{};
};

inline SpinMoments spin_moments(const QubitDensityMatrix& state) {
  state.validate();
  SpinMoments m;
  auto ev = [&](const Matrix8& op) { return (state.rho * op).trace().real(); };
  constexpr std::array<std::pair<int, int>, 3> pairs{{{1, 2}, {1, 3}, {2, 3}}};
  for (int a = 0; a < 3; ++a) {
    const auto axis = static_cast<SpinAxis>(a);
    for (int s = 1; s <= 3; ++s) m.means[a][s - 1] = ev(spin_op(axis, s));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      m.covariances[a][k] = ev(spin_op(axis, i) * spin_op(axis, j)) - m.means[a][i - 1] * m.means[a][j - 1];
    }
  }
  return m;
}

/// G_DV evaluated on a three-qubit density matrix.
inline double witness_dv(const QubitDensityMatrix& state) {
  Matrix2 lower = Matrix2::Zero();
  lower(0, 1) = 1.0;  // |g><e|
  Matrix2 pe = Matrix2::Zero();
  pe(1, 1) = 1.0;
  auto ev = [&](const Matrix8& op) { return (state.rho * op).trace(); };
  const cplx coherence = ev(embed(lower, 1) * embed(lower, 2) * embed(lower, 3));
  const std::array<std::array<int, 3>, 3> splits{{{1, 2, 3}, {2, 1, 3}, {3, 1, 2}}};
  double best = 0.0;
  bool first = true;
  for (const auto& s : splits) {
    const double single = std::max(ev(embed(pe, s[0])).real(), 0.0);
    const double pair = std::max(ev(embed(pe, s[1]) * embed(pe, s[2])).real(), 0.0);
    const double term = std::sqrt(single * pair);
    if (first || term > best) best = term;
    first = false;
  }
  return std::abs(coherence) - best;
}

/// Pure two-qubit state sum c_{q1 q2} |q1 q2>, c = {c00, c01, c10, c11}.
struct TwoQubitPure {
  std::array<cplx, 4> c{cplx{1.0, 0.0}, {}, {}, {}};

  [[nodiscard]] double norm_squared() const {
    double s = 0.0;
    for (const auto& v : c) s += std::norm(v);
    return s;
  }

  static TwoQubitPure normalised(std::array<cplx, 4> v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    const double inv = 1.0 / std::sqrt(s);
    for (auto& x : v) x *= inv;
    return TwoQubitPure{v};
  }

  static TwoQubitPure bell_phi_plus() {
    const double r = 1.0 / std::sqrt(2.0);
    return TwoQubitPure{{cplx{r, 0.0}, {}, {}, cplx{r, 0.0}}};
  }
};

/// Closed form of Delta^2 S_z1 S_z2 for a pure two-qubit state:
///   (1 - |c10|^2 - |c01|^2)|c11|^2 - |c11|^4 - |c01|^2 |c10|^2
inline double zcov_formula(const TwoQubitPure& psi) {
  if (std::abs(psi.norm_squared() - 1.0) > 1e-12) throw NumericalError("zcov_formula: state not normalised");
  const double p01 = std::norm(psi.c[1]);
  const double p10 = std::norm(psi.c[2]);
  const double p11 = std::norm(psi.c[3]);
  return (1.0 - p10 - p01) * p11 - p11 * p11 - p01 * p10;
}

/// Direct <S_z1 S_z2> - <S_z1><S_z2> from the state vector.
inline double zcov_direct(const TwoQubitPure& psi) {
  double m1 = 0.0, m2 = 0.0, m12 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double w = std::norm(psi.c[static_cast<std::size_t>(k)]);
    const double z1 = ((k >> 1) & 1) ? 0.5 : -0.5;
    const double z2 = (k & 1) ? 0.5 : -0.5;
    m1 += w * z1;
    m2 += w * z2;
    m12 += w * z1 * z2;
  }
  return m12 - m1 * m2;
}

/// Same covariance for a two-qubit density matrix (4x4, index q1*2 + q2).
inline double zcov_mixed(const Eigen::Matrix4cd& rho) {
  double m1 = 0.0, m2 = 0.0, m12 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double w = rho(k, k).real();
    const double z1 = ((k >> 1) & 1) ? 0.5 : -0.5;
    const double z2 = (k & 1) ? 0.5 : -0.5;
    m1 += w * z1;
    m2 += w * z2;
    m12 += w * z1 * z2;
  }
  return m12 - m1 * m2;
}

inline TwoQubitPure random_pure(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::array<cplx, 4> v;
  for (auto& x : v) x = cplx{g(rng), g(rng)};
  return TwoQubitPure::normalised(v);
}

struct ZcovSearchResult {
  double max_value = 0.0;
  TwoQubitPure argmax;
  std::size_t samples = 0;
};

namespace detail {

/// Coordinate hill-climb on the populations (p01, p10, p11); p00 takes the
/// remainder. The formula ignores phases, so the climb returns real
/// non-negative amplitudes.
inline std::pair<double, TwoQubitPure> hill_climb(const TwoQubitPure& start) {
  std::array<double, 4> p{};
  for (std::size_t k = 0; k < 4; ++k) p[k] = std::norm(start.c[k]);
  auto eval = [](const std::array<double, 4>& q) { return (1.0 - q[2] - q[1]) * q[3] - q[3] * q[3] - q[1] * q[2]; };
  double best = eval(p);
  double step = 0.1;
  while (step > 1e-12) {
    bool improved = false;
    for (std::size_t k = 1; k < 4; ++k) {
      for (double dir : {1.0, -1.0}) {
        auto q = p;
        const double delta = std::clamp(dir * step, -q[k], q[0]);
        q[k] += delta;
        q[0] -= delta;
        const double val = eval(q);
        if (val > best) {
          best = val;
          p = q;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  TwoQubitPure out;
  for (std::size_t k = 0; k < 4; ++k) out.c[k] = cplx{std::sqrt(std::max(p[k], 0.0)), 0.0};
  out = TwoQubitPure::normalised(out.c);
  return {zcov_formula(out), out};
}

}  // namespace detail

/// Random search over Haar-like pure states followed by a hill-climb from the
/// best sample. When a start state is given it is the first candidate.
inline ZcovSearchResult zcov_maximize(std::size_t samples, std::uint64_t seed,
                                      const TwoQubitPure* start = nullptr) {
  if (samples < 1) throw ConfigError("zcov_maximize: samples must be >= 1");
  std::mt19937_64 rng(seed);
  ZcovSearchResult res;
  res.samples = samples;
  bool have = false;
  for (std::size_t s = 0; s < samples; ++s) {
    const TwoQubitPure psi = (s == 0 && start != nullptr) ? *start : random_pure(rng);
    const double v = zcov_formula(psi);
    if (!have || v > res.max_value) {
      res.max_value = v;
      res.argmax = psi;
      have = true;
    }
  }
  auto [climbed, state] = detail::hill_climb(res.argmax);
  if (climbed > res.max_value) {
    res.max_value = climbed;
    res.argmax = state;
  }
  return res;
}

/// |<Phi+|psi>|^2.
inline double bell_fidelity(const TwoQubitPure& psi) {
  const auto b = TwoQubitPure::bell_phi_plus();
  cplx o{0.0, 0.0};
  for (std::size_t k = 0; k < 4; ++k) o += std::conj(b.c[k]) * psi.c[k];
  return std::norm(o);
}

}  // namespace spdc3q::qubits
