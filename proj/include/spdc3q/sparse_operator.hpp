#pragma once

// Complex sparse operator on the composite basis. Storage is Eigen's
// compressed row-major format, so nonzeros are enumerated row by row with
// sorted columns and construction is bit-reproducible.

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "spdc3q/fockspace.hpp"

namespace spdc3q {

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor, int>;

struct Entry {
  std::size_t row;
  std::size_t col;
  cplx value;
};

class SparseOperator {
 public:
  SparseOperator() = default;
  explicit SparseOperator(SparseMatrix m, bool hermitian = false)
      : mat_(std::move(m)), hermitian_(hermitian) {
    if (mat_.rows() != mat_.cols()) throw std::invalid_argument("operator must be square");
    mat_.makeCompressed();
  }

  /// Build from the action on each basis vector: action(k, emit) calls
  /// emit(target_row, amplitude) for every nonzero <target|O|k>.
  template <class Action>
  static SparseOperator from_column_action(std::size_t dim, Action&& action, bool hermitian = false) {
    std::vector<Eigen::Triplet<cplx, int>> trips;
    trips.reserve(dim * 2);
    for (std::size_t k = 0; k < dim; ++k) {
      action(k, [&](std::size_t row, cplx v) {
        if (v != cplx{0.0, 0.0}) trips.emplace_back(static_cast<int>(row), static_cast<int>(k), v);
      });
    }
    SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setFromTriplets(trips.begin(), trips.end());
    return SparseOperator(std::move(m), hermitian);
  }

  static SparseOperator identity(std::size_t dim) {
    SparseMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    m.setIdentity();
    return SparseOperator(std::move(m), true);
  }

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(mat_.rows()); }
  [[nodiscard]] std::size_t nonzeros() const noexcept { return static_cast<std::size_t>(mat_.nonZeros()); }
  [[nodiscard]] bool hermitian_flag() const noexcept { return hermitian_; }
  [[nodiscard]] const SparseMatrix& matrix() const noexcept { return mat_; }

  [[nodiscard]] cplx coeff(std::size_t r, std::size_t c) const {
    return mat_.coeff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  /// Nonzeros in canonical (row-major, ascending column) order.
  [[nodiscard]] std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(nonzeros());
    for (Eigen::Index r = 0; r < mat_.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(mat_, r); it; ++it) {
        out.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()), it.value()});
      }
    }
    return out;
  }

  [[nodiscard]] CVector apply(const CVector& v) const {
    check_vec(v);
    CVector out = mat_ * v;
    return out;
  }

  void apply_into(const CVector& v, CVector& out) const {
    check_vec(v);
    out.noalias() = mat_ * v;
  }

  /// <v|O|v>.
  [[nodiscard]] cplx expectation(const CVector& v) const { return v.dot(apply(v)); }

  [[nodiscard]] SparseOperator adjoint() const {
    SparseMatrix m = mat_.adjoint();
    return SparseOperator(std::move(m), hermitian_);
  }

  /// Largest |O_rc - conj(O_cr)|.
  [[nodiscard]] double hermiticity_defect() const {
    SparseMatrix d = mat_ - SparseMatrix(mat_.adjoint());
    return max_abs(d);
  }

  [[nodiscard]] double max_abs_entry() const { return max_abs(mat_); }

  /// Mark as Hermitian after checking the conjugate-transpose property.
  SparseOperator& assert_hermitian(double tol = 0.0) {
    const double defect = hermiticity_defect();
    if (defect > tol) {
      throw NumericalError("operator flagged Hermitian has defect " + std::to_string(defect));
    }
    hermitian_ = true;
    return *this;
  }

  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
    check_same(a, b);
    return SparseOperator(SparseMatrix(a.mat_ + b.mat_), a.hermitian_ && b.hermitian_);
  }
  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
    check_same(a, b);
    return SparseOperator(SparseMatrix(a.mat_ - b.mat_), a.hermitian_ && b.hermitian_);
  }
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
    check_same(a, b);
    SparseMatrix m = (a.mat_ * b.mat_).pruned();
    return SparseOperator(std::move(m), false);
  }
  friend SparseOperator operator*(cplx s, const SparseOperator& a) {
    const bool herm = a.hermitian_ && s.imag() == 0.0;
    return SparseOperator(SparseMatrix(s * a.mat_), herm);
  }
  friend SparseOperator operator*(double s, const SparseOperator& a) {
    return SparseOperator(SparseMatrix(cplx{s, 0.0} * a.mat_), a.hermitian_);
  }

  /// One line per nonzero: "row col re im".
  void dump(std::ostream& os) const {
    const auto old_prec = os.precision(17);
    for (const auto& e : entries()) {
      os << e.row << ' ' << e.col << ' ' << e.value.real() << ' ' << e.value.imag() << '\n';
    }
    os.precision(old_prec);
  }

 private:
  static double max_abs(const SparseMatrix& m) {
    double best = 0.0;
    for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) best = std::max(best, std::abs(it.value()));
    }
    return best;
  }
  static void check_same(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("operator dimension mismatch");
  }
  void check_vec(const CVector& v) const {
    if (static_cast<std::size_t>(v.size()) != dim()) throw std::invalid_argument("vector dimension mismatch");
  }

  SparseMatrix mat_;
  bool hermitian_ = false;
};

/// Max absolute entry of AB - BA.
inline double commutator_norm(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("commutator_norm: dimension mismatch");
  return (a * b - b * a).max_abs_entry();
}

}  // namespace spdc3q
