#pragma once

// Operator assembly: ladder operators, quadratures, Pauli/spin operators,
// the driven three-pair Hamiltonian and the conserved pair-parity projector.
//
// Conventions: hbar = 1, x = (a + a^dag)/sqrt2, p = i(a^dag - a)/sqrt2,
// sigma_z|g> = -|g>, sigma+ = |e><g|, sigma- = |g><e|, S = sigma/2.
// Creation is hard-truncated: a^dag|N> = 0.

#include <array>
#include <cmath>
#include <vector>

#include "spdc3q/fockspace.hpp"
#include "spdc3q/sparse_operator.hpp"

namespace spdc3q {

enum class Ladder { raise, lower };
enum class Axis { x, y, z, plus, minus };

inline SparseOperator ladder(const SpaceHandle& space, int mode, Ladder which) {
  check_site(mode, "ladder");
  const int i = mode - 1;
  const int cutoff = space->config().cutoffs[i];
  return SparseOperator::from_column_action(space->dim(), [&](std::size_t k, auto&& emit) {
    BasisIndex b = space->unflat(k);
    const int n = b.n[i];
    if (which == Ladder::lower) {
      if (n == 0) return;
      b.n[i] = n - 1;
      emit(space->flat(b), cplx{std::sqrt(static_cast<double>(n)), 0.0});
    } else {
      if (n == cutoff) return;
      b.n[i] = n + 1;
      emit(space->flat(b), cplx{std::sqrt(static_cast<double>(n + 1)), 0.0});
    }
  });
}

inline SparseOperator annihilation(const SpaceHandle& space, int mode) { return ladder(space, mode, Ladder::lower); }
inline SparseOperator creation(const SpaceHandle& space, int mode) { return ladder(space, mode, Ladder::raise); }

inline SparseOperator number(const SpaceHandle& space, int mode) {
  check_site(mode, "number");
  const int i = mode - 1;
  return SparseOperator::from_column_action(
      space->dim(),
      [&](std::size_t k, auto&& emit) { emit(k, cplx{static_cast<double>(space->unflat(k).n[i]), 0.0}); },
      true);
}

struct Quadratures {
  SparseOperator x;
  SparseOperator p;
};

inline Quadratures quadratures(const SpaceHandle& space, int mode) {
  const SparseOperator a = annihilation(space, mode);
  const SparseOperator ad = creation(space, mode);
  const double s = 1.0 / std::sqrt(2.0);
  SparseOperator x = s * (a + ad);
  SparseOperator p = cplx{0.0, s} * (ad - a);
  x.assert_hermitian();
  p.assert_hermitian();
  return {std::move(x), std::move(p)};
}

inline SparseOperator pauli(const SpaceHandle& space, int qubit, Axis axis) {
  check_site(qubit, "pauli");
  const int i = qubit - 1;
  const bool herm = axis == Axis::x || axis == Axis::y || axis == Axis::z;
  return SparseOperator::from_column_action(
      space->dim(),
      [&](std::size_t k, auto&& emit) {
        BasisIndex b = space->unflat(k);
        const int q = b.q[i];
        switch (axis) {
          case Axis::z:
            emit(k, cplx{q == 1 ? 1.0 : -1.0, 0.0});
            return;
          case Axis::x:
            b.q[i] = 1 - q;
            emit(space->flat(b), cplx{1.0, 0.0});
            return;
          case Axis::y:
            // sigma_y|g> = -i|e>, sigma_y|e> = i|g>
            b.q[i] = 1 - q;
            emit(space->flat(b), q == 0 ? cplx{0.0, -1.0} : cplx{0.0, 1.0});
            return;
          case Axis::plus:
            if (q == 1) return;
            b.q[i] = 1;
            emit(space->flat(b), cplx{1.0, 0.0});
            return;
          case Axis::minus:
            if (q == 0) return;
            b.q[i] = 0;
            emit(space->flat(b), cplx{1.0, 0.0});
            return;
        }
      },
      herm);
}

inline SparseOperator spin(const SpaceHandle& space, int qubit, Axis axis) { return 0.5 * pauli(space, qubit, axis); }

/// sigma+ sigma-: projector onto the excited level of one qubit.
inline SparseOperator excited_projector(const SpaceHandle& space, int qubit) {
  check_site(qubit, "excited_projector");
  const int i = qubit - 1;
  return SparseOperator::from_column_action(
      space->dim(),
      [&](std::size_t k, auto&& emit) {
        if (space->unflat(k).q[i] == 1) emit(k, cplx{1.0, 0.0});
      },
      true);
}

/// Static part plus pump: H(t) = H0 + g0 cos(w_d t) X3 with
///   H0 = sum_i w_i n_i + (W_i/2) sigma_z,i + g_i sigma_x,i (a_i + a_i^dag)
///   X3 = (a1 + a1^dag)(a2 + a2^dag)(a3 + a3^dag)
class HamiltonianModel {
 public:
  HamiltonianModel(SpaceHandle space, SparseOperator h0, SparseOperator x3)
      : space_(std::move(space)), h0_(std::move(h0)), x3_(std::move(x3)) {
    const auto& cfg = space_->config();
    g0_ = cfg.pump_coupling;
    drive_ = cfg.drive_freq();
    merge_patterns();
  }

  [[nodiscard]] const SpaceHandle& space() const noexcept { return space_; }
  [[nodiscard]] const SparseOperator& static_part() const noexcept { return h0_; }
  [[nodiscard]] const SparseOperator& pump_operator() const noexcept { return x3_; }
  [[nodiscard]] double pump_coupling() const noexcept { return g0_; }
  [[nodiscard]] double drive_freq() const noexcept { return drive_; }

  /// Same operators, different pump strength.
  [[nodiscard]] HamiltonianModel with_pump_coupling(double g0) const {
    if (!(g0 >= 0.0)) throw ConfigError("pump coupling g0 must be >= 0");
    HamiltonianModel copy = *this;
    copy.g0_ = g0;
    copy.update_norm_bound();
    return copy;
  }

  [[nodiscard]] double envelope(double t) const { return g0_ * std::cos(drive_ * t); }

  [[nodiscard]] SparseOperator evaluate(double t) const {
    SparseOperator h = h0_ + envelope(t) * x3_;
    h.assert_hermitian();
    return h;
  }

  /// out = H(t) v in one pass over the merged sparsity pattern.
  void apply(double t, const CVector& v, CVector& out) const {
    const double g = envelope(t);
    const auto n = static_cast<Eigen::Index>(row_ptr_.size() - 1);
    out.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      cplx acc{0.0, 0.0};
      for (std::size_t e = row_ptr_[r]; e < row_ptr_[r + 1]; ++e) {
        acc += (static_val_[e] + g * pump_val_[e]) * v(col_[e]);
      }
      out(r) = acc;
    }
  }

  /// Upper bound on ||H(t)|| (max absolute row sum) valid for every t.
  [[nodiscard]] double norm_bound() const noexcept { return norm_bound_; }

 private:
  void merge_patterns() {
    const auto& a = h0_.matrix();
    const auto& b = x3_.matrix();
    const auto n = a.rows();
    row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    static_row_sum_.assign(static_cast<std::size_t>(n), 0.0);
    pump_row_sum_.assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index r = 0; r < n; ++r) {
      SparseMatrix::InnerIterator ia(a, r), ib(b, r);
      while (ia || ib) {
        cplx va{0.0, 0.0}, vb{0.0, 0.0};
        Eigen::Index c;
        if (ia && (!ib || ia.col() < ib.col())) {
          c = ia.col(); va = ia.value(); ++ia;
        } else if (ib && (!ia || ib.col() < ia.col())) {
          c = ib.col(); vb = ib.value(); ++ib;
        } else {
          c = ia.col(); va = ia.value(); vb = ib.value(); ++ia; ++ib;
        }
        col_.push_back(c);
        static_val_.push_back(va);
        pump_val_.push_back(vb);
        static_row_sum_[static_cast<std::size_t>(r)] += std::abs(va);
        pump_row_sum_[static_cast<std::size_t>(r)] += std::abs(vb);
      }
      row_ptr_[static_cast<std::size_t>(r) + 1] = col_.size();
    }
    update_norm_bound();
  }

  void update_norm_bound() {
    norm_bound_ = 0.0;
    for (std::size_t r = 0; r < static_row_sum_.size(); ++r) {
      norm_bound_ = std::max(norm_bound_, static_row_sum_[r] + g0_ * pump_row_sum_[r]);
    }
  }

  SpaceHandle space_;
  SparseOperator h0_;
  SparseOperator x3_;
  double g0_ = 0.0;
  double drive_ = 0.0;
  std::vector<std::size_t> row_ptr_;
  std::vector<Eigen::Index> col_;
  std::vector<cplx> static_val_;
  std::vector<cplx> pump_val_;
  std::vector<double> static_row_sum_;
  std::vector<double> pump_row_sum_;
  double norm_bound_ = 0.0;
};

/// g_i sigma_x,i (a_i + a_i^dag) for one pair, unscaled when g = 1.
inline SparseOperator rabi_term(const SpaceHandle& space, int site, double g = 1.0) {
  check_site(site, "rabi_term");
  const int i = site - 1;
  const int cutoff = space->config().cutoffs[i];
  return SparseOperator::from_column_action(
      space->dim(),
      [&](std::size_t k, auto&& emit) {
        BasisIndex b = space->unflat(k);
        const int n = b.n[i];
        b.q[i] = 1 - b.q[i];
        if (n > 0) {
          BasisIndex d = b;
          d.n[i] = n - 1;
          emit(space->flat(d), cplx{g * std::sqrt(static_cast<double>(n)), 0.0});
        }
        if (n < cutoff) {
          BasisIndex u = b;
          u.n[i] = n + 1;
          emit(space->flat(u), cplx{g * std::sqrt(static_cast<double>(n + 1)), 0.0});
        }
      },
      true);
}

/// (a1 + a1^dag)(a2 + a2^dag)(a3 + a3^dag).
inline SparseOperator pump_operator(const SpaceHandle& space) {
  const auto& cut = space->config().cutoffs;
  return SparseOperator::from_column_action(
      space->dim(),
      [&](std::size_t k, auto&& emit) {
        const BasisIndex& b = space->unflat(k);
        for (int mask = 0; mask < 8; ++mask) {
          BasisIndex t = b;
          double amp = 1.0;
          for (int i = 0; i < kSites && amp != 0.0; ++i) {
            const bool up = (mask >> (kSites - 1 - i)) & 1;
            const int n = b.n[i];
            if (up) {
              if (n == cut[i]) amp = 0.0;
              else { t.n[i] = n + 1; amp *= std::sqrt(static_cast<double>(n + 1)); }
            } else {
              if (n == 0) amp = 0.0;
              else { t.n[i] = n - 1; amp *= std::sqrt(static_cast<double>(n)); }
            }
          }
          if (amp != 0.0) emit(space->flat(t), cplx{amp, 0.0});
        }
      },
      true);
}

inline SparseOperator static_hamiltonian(const SpaceHandle& space) {
  const auto& cfg = space->config();
  SparseOperator diag = SparseOperator::from_column_action(
      space->dim(),
      [&](std::size_t k, auto&& emit) {
        const BasisIndex& b = space->unflat(k);
        double e = 0.0;
        for (int i = 0; i < kSites; ++i) {
          e += cfg.mode_freqs[i] * b.n[i] + 0.5 * cfg.qubit_freqs[i] * (b.q[i] == 1 ? 1.0 : -1.0);
        }
        emit(k, cplx{e, 0.0});
      },
      true);
  SparseOperator h0 = diag;
  for (int site = 1; site <= kSites; ++site) h0 = h0 + rabi_term(space, site, cfg.rabi_couplings[site - 1]);
  h0.assert_hermitian();
  return h0;
}

inline HamiltonianModel build_hamiltonian(const SpaceHandle& space) {
  return HamiltonianModel(space, static_hamiltonian(space), pump_operator(space));
}

enum class ProjectorVariant {
  pair_parity,  // equal (n_i + q_i) mod 2 on every pair; commutes with H
  literal,      // one shared photon parity and one shared qubit level for all pairs
};

inline SparseOperator parity_projector(const SpaceHandle& space,
                                       ProjectorVariant variant = ProjectorVariant::pair_parity) {
  return SparseOperator::from_column_action(
      space->dim(),
      [&](std::size_t k, auto&& emit) {
        const BasisIndex& b = space->unflat(k);
        bool keep = false;
        if (variant == ProjectorVariant::pair_parity) {
          keep = equal_pair_parity(b);
        } else {
          const int alpha = b.n[0] % 2;
          const int beta = b.q[0];
          keep = true;
          for (int i = 0; i < kSites; ++i) keep = keep && b.n[i] % 2 == alpha && b.q[i] == beta;
        }
        if (keep) emit(k, cplx{1.0, 0.0});
      },
      true);
}

}  // namespace spdc3q
