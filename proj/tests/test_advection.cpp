#include "support.hpp"

using namespace bht;

TEST_CASE("zero velocity advects nothing") {
  const auto theta = testing::random_field(8, 2);
  const auto out = convolve_advection(VectorField(8), theta);
  CHECK(testing::max_abs(out) == 0.0);
}

TEST_CASE("single-mode product lands on the sum and difference modes") {
  SpectralField psi(4);
  psi.set_pair({1, 0}, Complex{1.0, 0.0});
  const auto u = velocity_from_streamfunction(psi);
  SpectralField theta(4);
  theta.set_pair({0, 1}, Complex{1.0, 0.0});
  const auto out = convolve_advection(u, theta);
  for (const auto& k : out.lattice().modes()) {
    const bool expected = std::abs(k.x) == 1 && std::abs(k.y) == 1;
    if (expected)
      CHECK(std::abs(out[k]) > 0.1);
    else
      CHECK(std::abs(out[k]) <= 1e-15);
  }
}

TEST_CASE("velocity along the level sets of the base state") {
  const int K = 8;
  SourceSpec src;
  src.kappa_g = 4.0;
  const auto g = build_source(src, sample_static_phases(5, K));
  const auto theta0 = -1.0 * inverse_laplacian(g);
  const auto u = velocity_from_streamfunction(0.3 * inverse_laplacian(g));
  const auto out = convolve_advection(u, theta0);
  CHECK(testing::max_abs(out) <= 1e-14 * testing::max_abs(theta0));
}

TEST_CASE("FFT path matches the direct convolution") {
  for (int K : {1, 2, 5, 8, 12}) {
    for (std::uint64_t seed : {1u, 2u}) {
      const auto u = testing::random_velocity(K, seed, 0.5, -2.5);
      const auto theta = testing::random_field(K, seed + 10);
      const auto fast = convolve_advection(u, theta);
      const auto slow = direct_convolve_advection(u, theta);
      CHECK(testing::max_abs_diff(fast, slow) <= 1e-12 * std::max(1.0, testing::max_abs(slow)));
      CHECK(reality_defect(fast) <= 1e-15);
    }
  }
}

TEST_CASE("operator reuse gives identical results") {
  AdvectionOperator op(10);
  const auto u = testing::random_velocity(10, 4);
  const auto theta = testing::random_field(10, 4);
  const auto a = op.apply(u, theta);
  const auto b = op.apply(u, theta);
  CHECK(testing::max_abs_diff(a, b) == 0.0);
  CHECK(op.grid_size() >= 31);
}

TEST_CASE("mismatched truncations are rejected") {
  AdvectionOperator op(6);
  CHECK(testing::throws_kind([&] { op.apply(VectorField(6), SpectralField(7)); }, ErrorKind::truncation_mismatch));
  CHECK(testing::throws_kind([&] { op.apply(VectorField(7), SpectralField(7)); }, ErrorKind::truncation_mismatch));
  CHECK(testing::throws_kind([] { direct_convolve_advection(VectorField(3), SpectralField(4)); },
                             ErrorKind::truncation_mismatch));
}

TEST_CASE("smooth FFT sizes") {
  CHECK(detail::smooth_fft_size(7) == 8);
  CHECK(detail::smooth_fft_size(25) == 25);
  CHECK(detail::smooth_fft_size(97) == 100);
  CHECK(detail::smooth_fft_size(385) == 400);
}
