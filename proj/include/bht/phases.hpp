#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bht/error.hpp"
#include "bht/lattice.hpp"
#include "bht/rng.hpp"

namespace bht {

namespace streams {
inline constexpr std::uint64_t initial_phase = 1;
inline constexpr std::uint64_t phase_rate = 2;
}  // namespace streams

/// Random phases φ_k with φ_{-k} = -φ_k (mod 2π). Phases of the upper
/// half-plane are i.i.d. uniform on [0, 2π) and keyed by (seed, k), so the
/// phase of a mode does not depend on the truncation it is sampled at.
class PhaseAssignment {
 public:
  PhaseAssignment(std::uint64_t seed, int k_max)
      : seed_(seed), lattice_(lattice_for(k_max)), phases_(lattice_->size(), 0.0) {}

  std::uint64_t seed() const { return seed_; }
  int k_max() const { return lattice_->k_max(); }
  const Lattice& lattice() const { return *lattice_; }

  double operator[](WaveVector k) const {
    return lattice_->contains(k) ? phases_[lattice_->index(k)] : 0.0;
  }

  /// Stores φ_k for an upper-half-plane k and the conjugate phase at -k.
  void set_pair(WaveVector k, double phase) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    phase = std::fmod(phase, two_pi);
    if (phase < 0.0) phase += two_pi;
    phases_[lattice_->index(k)] = phase;
    phases_[lattice_->index(-k)] = phase == 0.0 ? 0.0 : two_pi - phase;
  }

 private:
  std::uint64_t seed_;
  std::shared_ptr<const Lattice> lattice_;
  std::vector<double> phases_;
};

/// Uniform initial phase of the upper-half-plane representative of k.
inline double initial_phase(std::uint64_t seed, WaveVector k) {
  const WaveVector c = canonical(k);
  return 2.0 * std::numbers::pi * rng::to_unit(rng::key(seed, streams::initial_phase, c.x, c.y));
}

inline PhaseAssignment sample_static_phases(std::uint64_t seed, int k_max) {
  require(k_max >= 1, ErrorKind::invalid_argument, "k_max must be >= 1");
  PhaseAssignment out(seed, k_max);
  for (const auto& k : out.lattice().upper_modes()) out.set_pair(k, initial_phase(seed, k));
  return out;
}

enum class CorrelationShape { constant_one, gaussian, sech };

constexpr std::string_view to_string(CorrelationShape s) {
  switch (s) {
    case CorrelationShape::constant_one: return "constant-one";
    case CorrelationShape::gaussian: return "gaussian";
    case CorrelationShape::sech: return "sech";
  }
  return "unknown";
}

inline CorrelationShape parse_correlation_shape(std::string_view name) {
  if (name == "constant-one" || name == "constant") return CorrelationShape::constant_one;
  if (name == "gaussian") return CorrelationShape::gaussian;
  if (name == "sech") return CorrelationShape::sech;
  throw Error(ErrorKind::invalid_argument, "unknown correlation shape '" + std::string(name) + "'");
}

namespace detail {

/// Φ^{(n)}(s) = sech(s) P_n(tanh s) with P_{n+1} = -t P_n + (1 - t^2) P_n'.
inline const std::vector<std::vector<double>>& sech_derivative_polys() {
  static const auto polys = [] {
    constexpr int max_order = 16;
    std::vector<std::vector<double>> p(max_order + 1);
    p[0] = {1.0};
    for (int n = 0; n < max_order; ++n) {
      const auto& cur = p[n];
      std::vector<double> next(cur.size() + 1, 0.0);
      for (std::size_t d = 0; d < cur.size(); ++d) {
        next[d + 1] -= cur[d];  // -t * P
        if (d > 0) {            // (1 - t^2) P'
          next[d - 1] += double(d) * cur[d];
          next[d + 1] -= double(d) * cur[d];
        }
      }
      p[n + 1] = std::move(next);
    }
    return p;
  }();
  return polys;
}

inline double eval_poly(const std::vector<double>& c, double t) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
  return acc;
}

/// Probabilists' Hermite polynomial He_n.
inline double hermite_he(int n, double x) {
  double prev = 1.0, cur = x;
  if (n == 0) return prev;
  for (int m = 1; m < n; ++m) {
    const double next = x * cur - m * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace detail

/// Stationary phase correlation E e^{i(φ_k(s) - φ_k(r))} = Φ(χ_k |s - r|)
/// with χ_k = χ |k|^η.
struct CorrelationLaw {
  CorrelationShape shape = CorrelationShape::constant_one;
  double chi = 1.0;
  double eta = 0.0;

  static constexpr int max_derivative = 16;

  void validate() const {
    require(chi > 0.0 && std::isfinite(chi), ErrorKind::invalid_argument, "chi must be positive");
    require(eta >= 0.0 && eta < 2.0, ErrorKind::invalid_argument,
            "eta must satisfy 0 <= eta < 2");
  }

  double chi_k(WaveVector k) const { return chi * std::pow(k.norm(), eta); }
  double chi_k(double k_mag) const { return chi * std::pow(k_mag, eta); }

  /// Φ(s), s >= 0 (evaluated at |s|).
  double phi(double s) const { return derivative(0, s); }

  /// n-th derivative of Φ on [0, ∞).
  double derivative(int n, double s) const {
    require(n >= 0 && n <= max_derivative, ErrorKind::invalid_argument,
            "derivative order out of range");
    s = std::abs(s);
    switch (shape) {
      case CorrelationShape::constant_one:
        return n == 0 ? 1.0 : 0.0;
      case CorrelationShape::gaussian: {
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        return sign * detail::hermite_he(n, s) * std::exp(-0.5 * s * s);
      }
      case CorrelationShape::sech:
        return detail::eval_poly(detail::sech_derivative_polys()[n], std::tanh(s)) / std::cosh(s);
    }
    return 0.0;
  }

  double derivative_at_zero(int n) const { return derivative(n, 0.0); }

  bool has_sampler() const { return shape != CorrelationShape::sech; }

  friend bool operator==(const CorrelationLaw&, const CorrelationLaw&) = default;
};

/// Φ(χ_k dt)
inline double correlation_oracle(const CorrelationLaw& law, WaveVector k, double dt) {
  require(dt >= 0.0, ErrorKind::invalid_argument, "dt must be non-negative");
  return law.phi(law.chi_k(k) * dt);
}

/// Unwrapped sampled phase φ_k(t_i) on an increasing time grid.
struct PhasePath {
  WaveVector k;
  std::vector<double> times;
  std::vector<double> values;
};

/// Time-dependent phases for every mode of a run. The Gaussian process is a
/// random-rate drift φ_k(t) = φ_k(0) + χ_k Z_k t with Z_k ~ N(0, 1), whose
/// increments give exactly Φ(s) = exp(-s^2/2). Constant-one freezes φ_k(0).
class PhaseProcess {
 public:
  PhaseProcess(std::uint64_t seed, CorrelationLaw law) : seed_(seed), law_(law) {
    law_.validate();
    require(law_.has_sampler(), ErrorKind::no_sampler,
            "no path sampler for correlation shape '" + std::string(to_string(law_.shape)) + "'");
  }

  std::uint64_t seed() const { return seed_; }
  const CorrelationLaw& law() const { return law_; }

  /// Drift rate of mode k; odd under k -> -k.
  double rate(WaveVector k) const {
    if (law_.shape == CorrelationShape::constant_one) return 0.0;
    const WaveVector c = canonical(k);
    const double z = rng::to_normal(rng::key(seed_, streams::phase_rate, c.x, c.y));
    const double r = law_.chi_k(c) * z;
    return in_upper_half(k) ? r : -r;
  }

  double phase(WaveVector k, double t) const {
    const double p0 = initial_phase(seed_, k);
    const double r = rate(k);
    return in_upper_half(k) ? p0 + r * t : -p0 + r * t;
  }

  /// Snapshot of all phases at time t.
  PhaseAssignment at(double t, int k_max) const {
    PhaseAssignment out(seed_, k_max);
    for (const auto& k : out.lattice().upper_modes()) out.set_pair(k, phase(k, t));
    return out;
  }

  PhasePath path(WaveVector k, std::span<const double> times) const {
    PhasePath p{k, {times.begin(), times.end()}, {}};
    p.values.reserve(times.size());
    for (double t : times) p.values.push_back(phase(k, t));
    return p;
  }

 private:
  std::uint64_t seed_;
  CorrelationLaw law_;
};

inline void check_time_grid(std::span<const double> times) {
  require(!times.empty(), ErrorKind::invalid_argument, "empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], ErrorKind::invalid_argument, "time grid must be increasing");
}

inline PhasePath sample_phase_path(std::uint64_t seed, WaveVector k, const CorrelationLaw& law,
                                   std::span<const double> times) {
  require(!k.is_zero(), ErrorKind::invalid_argument, "phase path for k = 0");
  check_time_grid(times);
  return PhaseProcess(seed, law).path(k, times);
}

}  // namespace bht
