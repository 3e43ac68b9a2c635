#pragma once

// Composite Hilbert space of three (boson mode x qubit) pairs.
//
// Basis order is interleaved, mode_i adjacent to qubit_i, with the third
// qubit running fastest:
//   k = ((((n1*2 + q1)*(N2+1) + n2)*2 + q2)*(N3+1) + n3)*2 + q3
// Sites are numbered 1, 2, 3 throughout the public API.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spdc3q {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;

inline constexpr int kSites = 3;

/// Raised for invalid physical or numerical configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical sanity check fails (negative occupations,
/// unnormalised input, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_site(int site, const char* what) {
  if (site < 1 || site > kSites) {
    throw std::out_of_range(std::string(what) + ": site index " + std::to_string(site) +
                            " outside 1..3");
  }
}

/// Physical parameters and truncation of the three-pair system. Frequencies
/// and couplings are in units of omega_1; hbar = 1.
struct SpaceConfig {
  std::array<int, kSites> cutoffs{6, 6, 6};  // inclusive max photon number
  std::array<double, kSites> mode_freqs{1.0, 2.0, 1.0};
  std::array<double, kSites> qubit_freqs{1.0, 2.0, 1.0};
  std::array<double, kSites> rabi_couplings{0.01, 0.01, 0.01};
  double pump_coupling = 0.1;
  // Unset means omega_1 + omega_2 + omega_3.
  double drive_freq_override = 0.0;
  bool drive_freq_overridden = false;

  [[nodiscard]] double drive_freq() const {
    if (drive_freq_overridden) return drive_freq_override;
    return mode_freqs[0] + mode_freqs[1] + mode_freqs[2];
  }

  void set_drive_freq(double w) {
    drive_freq_override = w;
    drive_freq_overridden = true;
  }

  void set_uniform_cutoff(int n) { cutoffs = {n, n, n}; }

  void validate() const {
    for (int i = 0; i < kSites; ++i) {
      const auto idx = std::to_string(i + 1);
      if (cutoffs[i] < 1) throw ConfigError("cutoff N" + idx + " must be >= 1");
      if (!(mode_freqs[i] > 0.0)) throw ConfigError("mode frequency omega" + idx + " must be > 0");
      if (!(qubit_freqs[i] > 0.0)) throw ConfigError("qubit frequency Omega" + idx + " must be > 0");
      if (!(rabi_couplings[i] >= 0.0)) throw ConfigError("Rabi coupling g" + idx + " must be >= 0");
    }
    if (!(pump_coupling >= 0.0)) throw ConfigError("pump coupling g0 must be >= 0");
    if (!(drive_freq() > 0.0)) throw ConfigError("drive frequency must be > 0");
  }
};

/// Occupations n_i in [0, N_i] and qubit levels q_i in {0 = g, 1 = e}.
struct BasisIndex {
  std::array<int, kSites> n{0, 0, 0};
  std::array<int, kSites> q{0, 0, 0};

  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

/// (n_i + q_i) mod 2 for each pair.
inline std::array<int, kSites> pair_parity(const BasisIndex& b) {
  return {(b.n[0] + b.q[0]) % 2, (b.n[1] + b.q[1]) % 2, (b.n[2] + b.q[2]) % 2};
}

inline bool equal_pair_parity(const BasisIndex& b) {
  const auto p = pair_parity(b);
  return p[0] == p[1] && p[1] == p[2];
}

/// Immutable description of the truncated product space. Shared read-only
/// between trajectories.
class FockSpace {
 public:
  explicit FockSpace(SpaceConfig config) : config_(std::move(config)) {
    config_.validate();
    dim_ = 1;
    for (int c : config_.cutoffs) dim_ *= static_cast<std::size_t>(2 * (c + 1));
    table_.resize(dim_);
    for (std::size_t k = 0; k < dim_; ++k) table_[k] = decode(k);
  }

  [[nodiscard]] const SpaceConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] int cutoff(int site) const {
    check_site(site, "cutoff");
    return config_.cutoffs[site - 1];
  }

  [[nodiscard]] std::size_t flat(const BasisIndex& b) const {
    std::size_t k = 0;
    for (int i = 0; i < kSites; ++i) {
      const int levels = config_.cutoffs[i] + 1;
      if (b.n[i] < 0 || b.n[i] >= levels || b.q[i] < 0 || b.q[i] > 1) {
        throw std::out_of_range("basis index outside truncated space");
      }
      k = (k * levels + static_cast<std::size_t>(b.n[i])) * 2 + static_cast<std::size_t>(b.q[i]);
    }
    return k;
  }

  [[nodiscard]] const BasisIndex& unflat(std::size_t k) const {
    if (k >= dim_) throw std::out_of_range("flat index outside space");
    return table_[k];
  }

  [[nodiscard]] const std::vector<BasisIndex>& basis() const noexcept { return table_; }

 private:
  [[nodiscard]] BasisIndex decode(std::size_t k) const {
    BasisIndex b;
    for (int i = kSites - 1; i >= 0; --i) {
      b.q[i] = static_cast<int>(k % 2);
      k /= 2;
      const auto levels = static_cast<std::size_t>(config_.cutoffs[i] + 1);
      b.n[i] = static_cast<int>(k % levels);
      k /= levels;
    }
    return b;
  }

  SpaceConfig config_;
  std::size_t dim_ = 0;
  std::vector<BasisIndex> table_;
};

using SpaceHandle = std::shared_ptr<const FockSpace>;

inline SpaceHandle build_space(const SpaceConfig& config) {
  return std::make_shared<const FockSpace>(config);
}

/// Amplitudes over the product basis of a given space.
struct StateVector {
  SpaceHandle space;
  CVector amplitudes;

  [[nodiscard]] double norm_squared() const { return amplitudes.squaredNorm(); }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(amplitudes.size()); }

  [[nodiscard]] cplx amplitude(const BasisIndex& b) const {
    return amplitudes(static_cast<Eigen::Index>(space->flat(b)));
  }
};

inline StateVector basis_state(const SpaceHandle& space, const BasisIndex& b) {
  StateVector s{space, CVector::Zero(static_cast<Eigen::Index>(space->dim()))};
  s.amplitudes(static_cast<Eigen::Index>(space->flat(b))) = 1.0;
  return s;
}

/// |0g 0g 0g>.
inline StateVector vacuum_state(const SpaceHandle& space) { return basis_state(space, BasisIndex{}); }

/// Overlap <a|b>.
inline cplx overlap(const StateVector& a, const StateVector& b) {
  return a.amplitudes.dot(b.amplitudes);
}

}  // namespace spdc3q
