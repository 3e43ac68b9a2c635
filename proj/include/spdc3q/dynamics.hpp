#pragma once

// Time-dependent Schroedinger evolution i d/dt psi = H(t) psi.
//
// Two independent steppers:
//   rk4          classical fixed-step Runge-Kutta on the amplitude ODE
//   midpoint_exp exp(-i H(t_mid) h) applied per step through a scaled,
//                truncated Taylor series
// The state is never renormalised; norm drift is reported.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdc3q/fockspace.hpp"
#include "spdc3q/operators.hpp"

namespace spdc3q {

enum class Method { rk4, midpoint_exp };

inline const char* method_name(Method m) { return m == Method::rk4 ? "a" : "b"; }

inline Method parse_method(const std::string& s) {
  if (s == "a" || s == "rk4") return Method::rk4;
  if (s == "b" || s == "midpoint" || s == "midpoint_exp") return Method::midpoint_exp;
  throw ConfigError("unknown method '" + s + "' (expected a or b)");
}

/// Default step: 1/2000 of the drive period. At 1/1000 the strongest default
/// pumps exceed the 1e-9 per unit time drift budget under RK4.
inline double default_step(double drive_freq) { return 2.0 * std::numbers::pi / drive_freq / 2000.0; }

/// Uniform sample times 0, spacing, 2*spacing, ... up to t_final inclusive.
inline std::vector<double> uniform_times(double t_final, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("sample spacing must be > 0");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor(t_final / spacing + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(static_cast<double>(k) * spacing);
  return out;
}

struct EvolutionSpec {
  double t_final = 25.0;
  std::vector<double> sample_times;  // strictly increasing, within [0, t_final]
  Method method = Method::rk4;
  double dt = 0.0;                       // <= 0 picks default_step
  double norm_tolerance_per_time = 1e-9;  // allowed |<psi|psi> - 1| per unit time
  double leakage_threshold = 1e-4;        // top-Fock population that triggers a warning
  bool keep_states = false;

  void validate() const {
    if (!(t_final >= 0.0)) throw ConfigError("t_final must be >= 0");
    for (std::size_t k = 0; k < sample_times.size(); ++k) {
      const double t = sample_times[k];
      if (t < 0.0 || t > t_final) throw ConfigError("sample time outside [0, t_final]");
      if (k > 0 && !(t > sample_times[k - 1])) throw ConfigError("sample times must be strictly increasing");
    }
    if (!(norm_tolerance_per_time > 0.0)) throw ConfigError("norm tolerance must be > 0");
  }

  [[nodiscard]] double step(double drive_freq) const { return dt > 0.0 ? dt : default_step(drive_freq); }
};

struct TrajectoryResult {
  bool ok = true;
  std::string diagnostic;
  std::vector<std::string> warnings;
  std::vector<double> times;          // sample times actually reached
  std::vector<StateVector> states;    // filled when keep_states
  double final_norm_deviation = 0.0;  // |<psi|psi> - 1| at the last sample
  double max_norm_deviation = 0.0;
  std::array<double, kSites> peak_leakage{0.0, 0.0, 0.0};
  double step = 0.0;
  Method method = Method::rk4;
};

/// Population of the top retained Fock level of each mode.
inline std::array<double, kSites> top_level_population(const StateVector& s) {
  std::array<double, kSites> out{0.0, 0.0, 0.0};
  const auto& space = *s.space;
  const auto& cut = space.config().cutoffs;
  for (std::size_t k = 0; k < space.dim(); ++k) {
    const double w = std::norm(s.amplitudes(static_cast<Eigen::Index>(k)));
    if (w == 0.0) continue;
    const BasisIndex& b = space.unflat(k);
    for (int i = 0; i < kSites; ++i) {
      if (b.n[i] == cut[i]) out[i] += w;
    }
  }
  return out;
}

/// Per-mode peak population at Fock level N_i over the trajectory.
inline std::array<double, kSites> leakage_report(const TrajectoryResult& r) {
  if (!r.ok) throw std::logic_error("leakage_report: trajectory failed: " + r.diagnostic);
  return r.peak_leakage;
}

namespace detail {

class Stepper {
 public:
  Stepper(const HamiltonianModel& h, Method m) : h_(h), method_(m) {
    const auto n = static_cast<Eigen::Index>(h.space()->dim());
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &tmp_, &term_, &next_}) v->resize(n);
  }

  void advance(CVector& psi, double t, double h) {
    if (method_ == Method::rk4) rk4(psi, t, h);
    else midpoint(psi, t, h);
  }

 private:
  // psi' = -i H(t) psi
  void rhs(double t, const CVector& v, CVector& out) {
    h_.apply(t, v, out);
    out *= cplx{0.0, -1.0};
  }

  void rk4(CVector& psi, double t, double h) {
    rhs(t, psi, k1_);
    tmp_ = psi + (0.5 * h) * k1_;
    rhs(t + 0.5 * h, tmp_, k2_);
    tmp_ = psi + (0.5 * h) * k2_;
    rhs(t + 0.5 * h, tmp_, k3_);
    tmp_ = psi + h * k3_;
    rhs(t + h, tmp_, k4_);
    psi += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
  }

  // exp(-i H(t + h/2) h) psi, split into substeps with ||H|| h_sub <= 0.5.
  void midpoint(CVector& psi, double t, double h) {
    const double tm = t + 0.5 * h;
    const double bound = h_.norm_bound();
    const int subs = std::max(1, static_cast<int>(std::ceil(bound * h / 0.5)));
    const double hs = h / subs;
    for (int s = 0; s < subs; ++s) {
      term_ = psi;
      next_ = psi;
      const double ref = psi.norm();
      for (int k = 1; k < 64; ++k) {
        h_.apply(tm, term_, tmp_);
        term_ = tmp_ * cplx{0.0, -hs / k};
        next_ += term_;
        if (term_.norm() <= 1e-17 * ref) break;
      }
      psi.swap(next_);
    }
  }

  const HamiltonianModel& h_;
  Method method_;
  CVector k1_, k2_, k3_, k4_, tmp_, term_, next_;
};

}  // namespace detail

/// Observer is called as on_sample(t, state) at every sample time.
template <class Observer>
TrajectoryResult evolve(const HamiltonianModel& ham, const EvolutionSpec& spec, const StateVector& initial,
                        Observer&& on_sample) {
  spec.validate();
  if (initial.dim() != ham.space()->dim()) {
    throw std::invalid_argument("evolve: state and Hamiltonian live on different spaces");
  }
  if (std::abs(initial.norm_squared() - 1.0) > 1e-12) throw NumericalError("evolve: initial state not normalised");

  TrajectoryResult result;
  result.method = spec.method;
  result.step = spec.step(ham.drive_freq());
  const double dt = result.step;

  detail::Stepper stepper(ham, spec.method);
  StateVector psi = initial;
  double t = 0.0;

  auto record = [&](double ts) {
    const double dev = std::abs(psi.norm_squared() - 1.0);
    result.final_norm_deviation = dev;
    result.max_norm_deviation = std::max(result.max_norm_deviation, dev);
    const auto leak = top_level_population(psi);
    for (int i = 0; i < kSites; ++i) result.peak_leakage[i] = std::max(result.peak_leakage[i], leak[i]);
    result.times.push_back(ts);
    if (spec.keep_states) result.states.push_back(psi);
    on_sample(ts, static_cast<const StateVector&>(psi));
    const double allowed = spec.norm_tolerance_per_time * std::max(ts, 1.0);
    if (dev > allowed) {
      result.ok = false;
      result.diagnostic = "norm drift " + std::to_string(dev) + " exceeds " + std::to_string(allowed) +
                          " at t=" + std::to_string(ts);
    }
  };

  for (double ts : spec.sample_times) {
    const double span = ts - t;
    if (span > 0.0) {
      const auto steps = static_cast<long>(std::ceil(span / dt - 1e-9));
      const double h = span / static_cast<double>(steps);
      for (long s = 0; s < steps; ++s) {
        stepper.advance(psi.amplitudes, t + static_cast<double>(s) * h, h);
      }
      t = ts;
    }
    record(ts);
    if (!result.ok) break;
  }

  if (result.ok) {
    for (int i = 0; i < kSites; ++i) {
      if (result.peak_leakage[i] > spec.leakage_threshold) {
        result.warnings.push_back("mode " + std::to_string(i + 1) + " top-level population " +
                                  std::to_string(result.peak_leakage[i]) + " exceeds " +
                                  std::to_string(spec.leakage_threshold));
      }
    }
  }
  return result;
}

inline TrajectoryResult evolve(const HamiltonianModel& ham, const EvolutionSpec& spec, const StateVector& initial) {
  return evolve(ham, spec, initial, [](double, const StateVector&) {});
}

}  // namespace spdc3q
