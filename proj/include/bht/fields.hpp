#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bht/error.hpp"
#include "bht/lattice.hpp"
#include "bht/phases.hpp"

namespace bht {

struct VelocitySpec {
  double U = 0.01;
  double beta = -3.0;
  int k_max = 128;

  void validate() const {
    require(U > 0.0 && std::isfinite(U), ErrorKind::invalid_argument, "U must be positive");
    require(beta < -2.0, ErrorKind::invalid_argument, "beta must satisfy beta < -2");
    require(k_max >= 1, ErrorKind::invalid_argument, "K_max must be >= 1");
  }

  /// |ψ_k| = U |k|^β
  double amplitude(WaveVector k) const { return U * std::pow(double(k.norm2()), 0.5 * beta); }

  friend bool operator==(const VelocitySpec&, const VelocitySpec&) = default;
};

/// Band-limited source profile γ(|k|), tabulated by the integer radius class
/// |k|^2. An empty table means the flat profile γ = 1 for |k| < κ_g.
struct SourceSpec {
  double kappa_g = 4.0;
  std::map<long, double> gamma_table;
  std::uint64_t seed = 0;

  void validate() const {
    require(kappa_g > 0.0, ErrorKind::invalid_argument, "kappa_g must be positive");
    for (const auto& [r2, g] : gamma_table) {
      require(r2 > 0, ErrorKind::invalid_argument, "gamma(0) must vanish");
      require(double(r2) < kappa_g * kappa_g, ErrorKind::invalid_argument,
              "gamma must vanish for |k| >= kappa_g (entry |k|^2=" + std::to_string(r2) + ")");
      require(g >= 0.0 && std::isfinite(g), ErrorKind::invalid_argument, "gamma must be >= 0");
    }
  }

  double gamma(long r2) const {
    if (r2 <= 0 || double(r2) >= kappa_g * kappa_g) return 0.0;
    if (gamma_table.empty()) return 1.0;
    const auto it = gamma_table.find(r2);
    return it == gamma_table.end() ? 0.0 : it->second;
  }
  double gamma(WaveVector k) const { return gamma(k.norm2()); }

  /// Every j ∈ Z^2 with γ_j > 0.
  std::vector<WaveVector> support() const {
    std::vector<WaveVector> out;
    const int r = static_cast<int>(std::ceil(kappa_g));
    for (int x = -r; x <= r; ++x)
      for (int y = -r; y <= r; ++y)
        if (gamma(WaveVector{x, y}) > 0.0) out.push_back({x, y});
    return out;
  }

  /// Smallest truncation that holds the whole source.
  int min_k_max() const {
    long r2max = 0;
    for (const auto& j : support()) r2max = std::max(r2max, j.norm2());
    return std::max(1, static_cast<int>(std::ceil(std::sqrt(double(r2max)))));
  }

  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

/// ψ_k = U |k|^β e^{iφ_k}
inline SpectralField build_streamfunction(const VelocitySpec& spec, const PhaseAssignment& phases) {
  spec.validate();
  require(phases.k_max() >= spec.k_max, ErrorKind::invalid_argument,
          "phase assignment does not cover the velocity truncation");
  SpectralField psi(spec.k_max);
  for (const auto& k : psi.lattice().upper_modes())
    psi.set_pair(k, std::polar(spec.amplitude(k), phases[k]));
  return psi;
}

/// u = ∇^⊥ψ = (-∂_y ψ, ∂_x ψ), i.e. u_k = i(-k_y, k_x) ψ_k
inline VectorField velocity_from_streamfunction(const SpectralField& psi) {
  VectorField u(psi.k_max());
  const Complex i{0.0, 1.0};
  for (const auto& k : psi.lattice().modes()) {
    u.x.ref(k) = -i * double(k.y) * psi[k];
    u.y.ref(k) = i * double(k.x) * psi[k];
  }
  return u;
}

inline VectorField build_velocity(const VelocitySpec& spec, const PhaseAssignment& phases) {
  return velocity_from_streamfunction(build_streamfunction(spec, phases));
}

/// g_k = -γ_k |k|^2 e^{iξ_k}, on the truncation of the ξ assignment.
inline SpectralField build_source(const SourceSpec& spec, const PhaseAssignment& xi) {
  spec.validate();
  require(xi.k_max() >= spec.min_k_max(), ErrorKind::invalid_argument,
          "xi assignment does not cover the source support");
  SpectralField g(xi.k_max());
  for (const auto& j : spec.support()) {
    if (!in_upper_half(j)) continue;
    g.set_pair(j, std::polar(-spec.gamma(j) * double(j.norm2()), xi[j]));
  }
  return g;
}

/// Σ_k |f_k|, an upper bound for sup_x |f(x)|.
inline double sup_norm_bound(const SpectralField& f) {
  double sum = 0.0;
  for (const auto& c : f.data()) sum += std::abs(c);
  return sum;
}

/// Σ_k |u_k| with |u_k| the Euclidean length of the coefficient vector.
inline double sup_norm_bound(const VectorField& u) {
  double sum = 0.0;
  for (const auto& k : u.x.lattice().modes())
    sum += std::sqrt(std::norm(u.x[k]) + std::norm(u.y[k]));
  return sum;
}

struct SourceFunctionals {
  double G0 = 0.0;            ///< Σ_j |j|^2 γ_j^2 = |∇^{-1} g|^2
  double G1 = 0.0;            ///< quartic angular functional entering the variance bound
  double grad_inv_sup = 0.0;  ///< Σ_j |j| γ_j >= |∇^{-1} g|_∞
};

inline SourceFunctionals source_functionals(const SourceSpec& spec) {
  spec.validate();
  SourceFunctionals f;
  const auto support = spec.support();
  for (const auto& j : support) {
    const double g = spec.gamma(j);
    f.G0 += double(j.norm2()) * g * g;
    f.grad_inv_sup += j.norm() * g;
  }
  for (const auto& i : support) {
    const double gi2 = spec.gamma(i) * spec.gamma(i);
    const double ix = i.x, iy = i.y;
    for (const auto& j : support) {
      const double jx = j.x, jy = j.y;
      const double w = 3 * ix * ix * jx * jx + ix * ix * jy * jy + iy * iy * jx * jx +
                       3 * iy * iy * jy * jy + 4 * ix * iy * jx * jy;
      f.G1 += w * gi2 * spec.gamma(j) * spec.gamma(j);
    }
  }
  return f;
}

}  // namespace bht
