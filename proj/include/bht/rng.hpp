#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, key...), so a mode's phase does not depend on the lattice
// size, the iteration order or the thread that evaluates it.

namespace bht::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ splitmix64(v + 0x632BE59BD9B4E019ull));
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t stream) {
  return mix(splitmix64(seed), stream);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t stream, int a, int b) {
  return mix(mix(key(seed, stream), static_cast<std::uint64_t>(static_cast<std::int64_t>(a))),
             static_cast<std::uint64_t>(static_cast<std::int64_t>(b)));
}

/// Uniform on [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two decorrelated words derived from `h`.
inline double to_normal(std::uint64_t h) {
  const double u1 = 1.0 - to_unit(splitmix64(h ^ 0xA5A5A5A5A5A5A5A5ull));  // (0, 1]
  const double u2 = to_unit(splitmix64(h + 0x5851F42D4C957F2Dull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Child seed for task `index` of a run with the given master seed.
constexpr std::uint64_t derive(std::uint64_t master, std::uint64_t index, std::uint64_t role) {
  return mix(mix(splitmix64(master), index), role);
}

}  // namespace bht::rng
