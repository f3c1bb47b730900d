#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

#include "bht/lattice.hpp"

namespace bht {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Smallest 2^a 3^b 5^c >= n.
inline int smooth_fft_size(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace detail

/// Pseudo-spectral evaluation of the Galerkin-truncated advection term
/// u·∇θ. The physical grid has N >= 3 k_max + 1 points per direction, so the
/// quadratic product is alias-free on the retained disk and the result equals
/// the direct convolution sum up to rounding.
///
/// Owns its FFTW plans and buffers; one instance per thread.
class AdvectionOperator {
 public:
  explicit AdvectionOperator(int k_max)
      : k_max_(k_max), n_(detail::smooth_fft_size(3 * k_max + 1)) {
    const std::size_t total = std::size_t(n_) * n_;
    vel_ = fftw_alloc_complex(total);
    grad_ = fftw_alloc_complex(total);
    std::lock_guard lock(detail::fftw_planner_mutex());
    backward_ = fftw_plan_dft_2d(n_, n_, vel_, vel_, FFTW_BACKWARD, FFTW_ESTIMATE);
    forward_ = fftw_plan_dft_2d(n_, n_, grad_, grad_, FFTW_FORWARD, FFTW_ESTIMATE);
  }

  AdvectionOperator(const AdvectionOperator&) = delete;
  AdvectionOperator& operator=(const AdvectionOperator&) = delete;

  ~AdvectionOperator() {
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(backward_);
      fftw_destroy_plan(forward_);
    }
    fftw_free(vel_);
    fftw_free(grad_);
  }

  int k_max() const { return k_max_; }
  int grid_size() const { return n_; }

  SpectralField apply(const VectorField& u, const SpectralField& theta) {
    require(u.k_max() == k_max_ && theta.k_max() == k_max_, ErrorKind::truncation_mismatch,
            "advection operator built for k_max " + std::to_string(k_max_));
    const std::size_t total = std::size_t(n_) * n_;
    auto* vel = reinterpret_cast<Complex*>(vel_);
    auto* grad = reinterpret_cast<Complex*>(grad_);
    std::fill(vel, vel + total, Complex{});
    std::fill(grad, grad + total, Complex{});

    // Both physical fields are real, so two of them share one complex
    // transform: F(a + i b) = a(x) + i b(x).
    const Complex i{0.0, 1.0};
    for (const auto& k : theta.lattice().modes()) {
      const std::size_t at = slot(k);
      vel[at] = u.x[k] + i * u.y[k];
      grad[at] = i * double(k.x) * theta[k] + i * (i * double(k.y) * theta[k]);
    }
    fftw_execute_dft(backward_, vel_, vel_);
    fftw_execute_dft(backward_, grad_, grad_);
    for (std::size_t p = 0; p < total; ++p)
      grad[p] = Complex{vel[p].real() * grad[p].real() + vel[p].imag() * grad[p].imag(), 0.0};
    fftw_execute_dft(forward_, grad_, grad_);

    const double scale = 1.0 / double(total);
    SpectralField out(k_max_);
    for (const auto& k : theta.lattice().upper_modes()) {
      const Complex c = 0.5 * (grad[slot(k)] + std::conj(grad[slot(-k)])) * scale;
      out.set_pair(k, c);
    }
    return out;
  }

 private:
  std::size_t slot(WaveVector k) const {
    const int ix = (k.x % n_ + n_) % n_;
    const int iy = (k.y % n_ + n_) % n_;
    return std::size_t(ix) * n_ + std::size_t(iy);
  }

  int k_max_;
  int n_;
  fftw_complex* vel_ = nullptr;
  fftw_complex* grad_ = nullptr;
  fftw_plan backward_ = nullptr;
  fftw_plan forward_ = nullptr;
};

/// u·∇θ on the truncated lattice; the k = 0 coefficient is discarded.
inline SpectralField convolve_advection(const VectorField& u, const SpectralField& theta) {
  require(u.k_max() == theta.k_max(), ErrorKind::truncation_mismatch,
          "velocity truncated at " + std::to_string(u.k_max()) + ", tracer at " +
              std::to_string(theta.k_max()));
  AdvectionOperator op(theta.k_max());
  return op.apply(u, theta);
}

}  // namespace bht
