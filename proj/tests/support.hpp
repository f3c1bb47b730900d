#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "bht/bht.hpp"
#include "catch_amalgamated.hpp"

namespace testing {

/// Real field with coefficients drawn from the counter RNG and amplitude decaying like |k|^-decay.
inline bht::SpectralField random_field(int k_max, std::uint64_t seed, double decay = 2.0) {
  bht::SpectralField f(k_max);
  for (const auto& k : f.lattice().upper_modes()) {
    const double a = bht::rng::to_normal(bht::rng::key(seed, 7, k.x, k.y));
    const double b = bht::rng::to_normal(bht::rng::key(seed, 8, k.x, k.y));
    f.set_pair(k, bht::Complex{a, b} * std::pow(k.norm(), -decay));
  }
  return f;
}

inline bht::VectorField random_velocity(int k_max, std::uint64_t seed, double U = 0.01, double beta = -3.0) {
  return bht::build_velocity({U, beta, k_max}, bht::sample_static_phases(seed, k_max));
}

inline double max_abs_diff(const bht::SpectralField& a, const bht::SpectralField& b) {
  double worst = 0.0;
  for (const auto& k : a.lattice().modes()) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

inline double max_abs(const bht::SpectralField& a) {
  double worst = 0.0;
  for (const auto& c : a.data()) worst = std::max(worst, std::abs(c));
  return worst;
}

inline bool throws_kind(const std::function<void()>& f, bht::ErrorKind kind) {
  try {
    f();
  } catch (const bht::Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace testing
