#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "bht/error.hpp"

namespace bht {

using Complex = std::complex<double>;

struct WaveVector {
  int x = 0;
  int y = 0;

  constexpr long norm2() const { return long(x) * x + long(y) * y; }
  double norm() const { return std::sqrt(static_cast<double>(norm2())); }
  constexpr bool is_zero() const { return x == 0 && y == 0; }

  constexpr WaveVector operator-() const { return {-x, -y}; }
  friend constexpr WaveVector operator+(WaveVector a, WaveVector b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr WaveVector operator-(WaveVector a, WaveVector b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr bool operator==(WaveVector, WaveVector) = default;
  friend constexpr auto operator<=>(WaveVector, WaveVector) = default;
};

/// j ∧ k = j_x k_y - j_y k_x
constexpr long wedge(WaveVector j, WaveVector k) { return long(j.x) * k.y - long(j.y) * k.x; }

/// Fourier upper half-plane: n > 0, or n = 0 and m > 0.
constexpr bool in_upper_half(WaveVector k) { return k.y > 0 || (k.y == 0 && k.x > 0); }

/// Canonical representative of {k, -k} in the upper half-plane.
constexpr WaveVector canonical(WaveVector k) { return in_upper_half(k) ? k : -k; }

/// Index tables for the truncated disk 0 < |k| <= k_max, stored densely over
/// the square [-k_max, k_max]^2. Shared between all fields of one truncation.
class Lattice {
 public:
  explicit Lattice(int k_max) : k_max_(k_max), side_(2 * k_max + 1) {
    require(k_max >= 1, ErrorKind::invalid_argument, "k_max must be >= 1");
    const long k2max = long(k_max) * k_max;
    for (int x = -k_max; x <= k_max; ++x) {
      for (int y = -k_max; y <= k_max; ++y) {
        const WaveVector k{x, y};
        if (k.is_zero() || k.norm2() > k2max) continue;
        modes_.push_back(k);
        if (in_upper_half(k)) upper_.push_back(k);
      }
    }
  }

  int k_max() const { return k_max_; }
  int side() const { return side_; }
  std::size_t size() const { return std::size_t(side_) * side_; }

  bool contains(WaveVector k) const {
    return !k.is_zero() && std::abs(k.x) <= k_max_ && std::abs(k.y) <= k_max_ &&
           k.norm2() <= long(k_max_) * k_max_;
  }

  std::size_t index(WaveVector k) const {
    return std::size_t(k.x + k_max_) * side_ + std::size_t(k.y + k_max_);
  }

  /// All retained modes, k != 0 and |k| <= k_max.
  const std::vector<WaveVector>& modes() const { return modes_; }
  /// Retained modes in the upper half-plane (one per conjugate pair).
  const std::vector<WaveVector>& upper_modes() const { return upper_; }

 private:
  int k_max_;
  int side_;
  std::vector<WaveVector> modes_;
  std::vector<WaveVector> upper_;
};

inline std::shared_ptr<const Lattice> lattice_for(int k_max) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const Lattice>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[k_max];
  if (!slot) slot = std::make_shared<const Lattice>(k_max);
  return slot;
}

/// Complex Fourier coefficients of a real, mean-free field on the periodic
/// box [0, 2π]^2, truncated to the disk |k| <= k_max. With the norm
/// convention |f|^2 = Σ_k |f_k|^2 (no |D| factor).
class SpectralField {
 public:
  explicit SpectralField(int k_max)
      : lattice_(lattice_for(k_max)), coeffs_(lattice_->size(), Complex{}) {}

  int k_max() const { return lattice_->k_max(); }
  const Lattice& lattice() const { return *lattice_; }
  bool contains(WaveVector k) const { return lattice_->contains(k); }

  /// Coefficient at k; zero outside the retained disk and at k = 0.
  Complex operator[](WaveVector k) const {
    return contains(k) ? coeffs_[lattice_->index(k)] : Complex{};
  }

  /// Sets f_k = value and f_{-k} = conj(value).
  void set_pair(WaveVector k, Complex value) {
    require(contains(k), ErrorKind::invalid_argument,
            "mode (" + std::to_string(k.x) + "," + std::to_string(k.y) + ") outside truncation");
    coeffs_[lattice_->index(k)] = value;
    coeffs_[lattice_->index(-k)] = std::conj(value);
  }

  /// Raw write access for builders that fill both halves themselves.
  Complex& ref(WaveVector k) { return coeffs_[lattice_->index(k)]; }

  std::span<const Complex> data() const { return coeffs_; }
  std::span<Complex> data() { return coeffs_; }

  SpectralField& operator+=(const SpectralField& other) {
    check_same(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& other) {
    check_same(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
  }
  SpectralField& operator*=(Complex s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(Complex s, SpectralField a) { return a *= s; }

  void check_same(const SpectralField& other) const {
    require(other.k_max() == k_max(), ErrorKind::truncation_mismatch,
            "fields truncated at " + std::to_string(k_max()) + " and " +
                std::to_string(other.k_max()));
  }

 private:
  std::shared_ptr<const Lattice> lattice_;
  std::vector<Complex> coeffs_;
};

/// Two-component field, e.g. the velocity u = (u_x, u_y).
struct VectorField {
  SpectralField x;
  SpectralField y;

  explicit VectorField(int k_max) : x(k_max), y(k_max) {}
  VectorField(SpectralField fx, SpectralField fy) : x(std::move(fx)), y(std::move(fy)) {
    x.check_same(y);
  }
  int k_max() const { return x.k_max(); }
};

/// Index set of the spectral projection P_{κ,2κ}: κ ≤ |k| < 2κ.
struct DyadicBand {
  double kappa = 0.0;
  std::vector<WaveVector> members;
};

inline bool in_band(WaveVector k, double kappa) {
  const double k2 = static_cast<double>(k.norm2());
  return kappa * kappa <= k2 && k2 < 4.0 * kappa * kappa;
}

/// All lattice points with κ ≤ |k| < 2κ. Membership compares squared
/// magnitudes, which are exact integers on the lattice.
inline DyadicBand dyadic_band(double kappa, int k_max) {
  require(kappa > 0.0, ErrorKind::invalid_argument, "kappa must be positive");
  if (2.0 * kappa > k_max + 1.0) {
    throw Error(ErrorKind::band_truncated, "band [" + std::to_string(kappa) + ", " +
                                               std::to_string(2.0 * kappa) +
                                               ") exceeds truncation " + std::to_string(k_max));
  }
  DyadicBand band{kappa, {}};
  const int r = static_cast<int>(std::ceil(2.0 * kappa));
  for (int x = -r; x <= r; ++x)
    for (int y = -r; y <= r; ++y)
      if (in_band({x, y}, kappa)) band.members.push_back({x, y});
  return band;
}

inline double band_power(const SpectralField& f, const DyadicBand& band) {
  double sum = 0.0;
  for (const auto& k : band.members) sum += std::norm(f[k]);
  return sum;
}

inline double l2_norm_squared(const SpectralField& f) {
  double sum = 0.0;
  for (const auto& c : f.data()) sum += std::norm(c);
  return sum;
}

inline double l2_norm(const SpectralField& f) { return std::sqrt(l2_norm_squared(f)); }

inline double l2_norm(const VectorField& u) {
  return std::sqrt(l2_norm_squared(u.x) + l2_norm_squared(u.y));
}

/// |f|_{H^1}^2 seminorm: Σ |k|^2 |f_k|^2.
inline double gradient_norm_squared(const SpectralField& f) {
  double sum = 0.0;
  for (const auto& k : f.lattice().modes()) sum += double(k.norm2()) * std::norm(f[k]);
  return sum;
}

/// (Δ^{-1} f)_k = -f_k / |k|^2
inline SpectralField inverse_laplacian(const SpectralField& f) {
  SpectralField out(f.k_max());
  for (const auto& k : f.lattice().modes()) out.ref(k) = -f[k] / double(k.norm2());
  return out;
}

/// (Δ f)_k = -|k|^2 f_k
inline SpectralField laplacian(const SpectralField& f) {
  SpectralField out(f.k_max());
  for (const auto& k : f.lattice().modes()) out.ref(k) = -double(k.norm2()) * f[k];
  return out;
}

/// Largest coefficient-wise violation of f_{-k} = conj(f_k).
inline double reality_defect(const SpectralField& f) {
  double worst = 0.0;
  for (const auto& k : f.lattice().upper_modes())
    worst = std::max(worst, std::abs(f[-k] - std::conj(f[k])));
  return worst;
}

/// Direct evaluation of the truncated convolution (u·∇θ)_k = Σ_q u_{k-q}·(i q) θ_q
/// for |k| <= k_max. O(modes^2); intended for small truncations and as the
/// reference for the FFT path.
inline SpectralField direct_convolve_advection(const VectorField& u, const SpectralField& theta) {
  u.x.check_same(theta);
  const auto& lat = theta.lattice();
  SpectralField out(theta.k_max());
  const Complex i{0.0, 1.0};
  for (const auto& k : lat.upper_modes()) {
    Complex acc{};
    for (const auto& q : lat.modes()) {
      const WaveVector p = k - q;
      if (!lat.contains(p)) continue;
      acc += (u.x[p] * double(q.x) + u.y[p] * double(q.y)) * i * theta[q];
    }
    out.set_pair(k, acc);
  }
  return out;
}

}  // namespace bht
