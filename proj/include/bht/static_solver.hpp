#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "bht/advection.hpp"
#include "bht/error.hpp"
#include "bht/fields.hpp"
#include "bht/lattice.hpp"
#include "bht/predictor.hpp"

namespace bht {

/// θ⁽⁰⁾ = -Δ^{-1} g, i.e. θ⁽⁰⁾_k = g_k / |k|^2
inline SpectralField base_solution(const SpectralField& g) { return -1.0 * inverse_laplacian(g); }

/// First-order tracer term ϑ = -Δ^{-1} φ⁽¹⁾ with φ⁽¹⁾ = -u·∇θ⁽⁰⁾, evaluated as a
/// sparse sum over the support of g: φ⁽¹⁾_k = -Σ_m u_{k-m}·(i m) g_m / |m|^2.
inline SpectralField first_order_term(const VectorField& u, const SpectralField& g) {
  g.check_same(u.x);
  const auto& lat = g.lattice();
  std::vector<WaveVector> support;
  for (const auto& m : lat.modes())
    if (g[m] != Complex{}) support.push_back(m);

  SpectralField out(g.k_max());
  const Complex i{0.0, 1.0};
  for (const auto& k : lat.upper_modes()) {
    Complex phi1{};
    for (const auto& m : support) {
      const WaveVector p = k - m;
      if (!lat.contains(p)) continue;
      const Complex theta0 = g[m] / double(m.norm2());
      phi1 -= (u.x[p] * double(m.x) + u.y[p] * double(m.y)) * i * theta0;
    }
    out.set_pair(k, phi1 / double(k.norm2()));
  }
  return out;
}

struct StaticSolverOptions {
  double tol = 1e-13;   ///< relative to |θ⁽⁰⁾|
  int max_iter = 200;
  double gate_ratio = 0.9;
  int gate_steps = 3;

  friend bool operator==(const StaticSolverOptions&, const StaticSolverOptions&) = default;
};

struct StaticSolveResult {
  SpectralField theta;
  SpectralField theta0;
  SpectralField vartheta;
  SpectralField remainder;  ///< δθ = θ - θ⁽⁰⁾ - ϑ
  int iterations = 0;
  std::vector<double> increment_norms;  ///< |θ⁽ⁿ⁾ - θ⁽ⁿ⁻¹⁾|, n = 1, 2, ...
  double residual = 0.0;                ///< |-Δθ + u·∇θ - g|

  /// Successive increment ratios, skipping increments at the rounding floor.
  std::vector<double> increment_ratios(double floor) const {
    std::vector<double> out;
    for (std::size_t n = 1; n < increment_norms.size(); ++n)
      if (increment_norms[n - 1] > floor && increment_norms[n] > floor)
        out.push_back(increment_norms[n] / increment_norms[n - 1]);
    return out;
  }
};

/// Fixed point of θ ↦ -Δ^{-1}[g - u·∇θ] starting from θ⁽⁰⁾ = -Δ^{-1} g.
inline StaticSolveResult iterate_static(const VectorField& u, const SpectralField& g,
                                        const StaticSolverOptions& opt = {},
                                        AdvectionOperator* op = nullptr) {
  g.check_same(u.x);
  require(opt.tol > 0.0, ErrorKind::invalid_argument, "tol must be positive");
  std::unique_ptr<AdvectionOperator> owned;
  if (op == nullptr) {
    owned = std::make_unique<AdvectionOperator>(g.k_max());
    op = owned.get();
  }

  SpectralField theta0 = base_solution(g);
  const double scale = l2_norm(theta0);
  const double tol = opt.tol * scale;
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * scale;

  SpectralField theta = theta0;
  SpectralField theta1 = theta0;
  std::vector<double> increments;
  bool converged = false;
  for (int n = 1; n <= opt.max_iter; ++n) {
    SpectralField next = -1.0 * inverse_laplacian(g - op->apply(u, theta));
    const double inc = l2_norm(next - theta);
    increments.push_back(inc);
    theta = std::move(next);
    if (n == 1) theta1 = theta;
    if (!std::isfinite(inc))
      throw Error(ErrorKind::divergent_iteration, "non-finite increment at step " + std::to_string(n));
    if (inc <= tol) {
      converged = true;
      break;
    }
    if (n >= 2 && increments[n - 2] > floor) {
      const double ratio = inc / increments[n - 2];
      if (n - 1 <= opt.gate_steps && ratio > opt.gate_ratio)
        throw Error(ErrorKind::divergent_iteration,
                    "contraction ratio " + std::to_string(ratio) + " at step " + std::to_string(n) +
                        " exceeds the gate; U is too large");
      if (n >= 5 && ratio >= 1.0)
        throw Error(ErrorKind::divergent_iteration,
                    "increments stopped contracting at step " + std::to_string(n));
    }
  }
  if (!converged)
    throw Error(ErrorKind::divergent_iteration,
                "no convergence in " + std::to_string(opt.max_iter) + " iterations");

  StaticSolveResult r{theta, theta0, theta1 - theta0, SpectralField(g.k_max()), 0, {}, 0.0};
  r.remainder = theta - theta0 - r.vartheta;
  r.iterations = static_cast<int>(increments.size());
  r.increment_norms = std::move(increments);
  SpectralField residual = -1.0 * laplacian(theta) + op->apply(u, theta) - g;
  r.residual = l2_norm(residual);
  return r;
}

/// Solves the truncated system (-Δ + u·∇)θ = g by dense LU over the real and
/// imaginary parts of the upper-half-plane coefficients.
inline SpectralField dense_oracle_solve(const VectorField& u, const SpectralField& g) {
  g.check_same(u.x);
  const auto& lat = g.lattice();
  const auto& upper = lat.upper_modes();
  const Eigen::Index n = static_cast<Eigen::Index>(upper.size());
  require(lat.modes().size() <= 8000, ErrorKind::invalid_argument,
          "dense oracle limited to 8000 modes, got " + std::to_string(lat.modes().size()));

  std::unordered_map<long, Eigen::Index> slot;
  auto code = [&](WaveVector k) { return long(k.x) * 1000003L + k.y; };
  for (Eigen::Index p = 0; p < n; ++p) slot[code(upper[p])] = p;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::VectorXd b(2 * n);
  const Complex i{0.0, 1.0};
  for (Eigen::Index row = 0; row < n; ++row) {
    const WaveVector k = upper[row];
    A(2 * row, 2 * row) += double(k.norm2());
    A(2 * row + 1, 2 * row + 1) += double(k.norm2());
    b(2 * row) = g[k].real();
    b(2 * row + 1) = g[k].imag();
    for (const auto& q : lat.modes()) {
      const WaveVector p = k - q;
      if (!lat.contains(p)) continue;
      const Complex c = (u.x[p] * double(q.x) + u.y[p] * double(q.y)) * i;
      if (c == Complex{}) continue;
      // θ_q = a + ib for q in the upper half-plane, conj(θ_{-q}) = a - ib otherwise.
      const bool up = in_upper_half(q);
      const Eigen::Index col = slot.at(code(canonical(q)));
      const double s = up ? 1.0 : -1.0;
      A(2 * row, 2 * col) += c.real();
      A(2 * row, 2 * col + 1) += -s * c.imag();
      A(2 * row + 1, 2 * col) += c.imag();
      A(2 * row + 1, 2 * col + 1) += s * c.real();
    }
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13))
    throw Error(ErrorKind::singular_system,
                "dense system is singular (rcond " + std::to_string(rcond) + ")");
  const Eigen::VectorXd x = lu.solve(b);
  const double bnorm = b.norm();
  const double rel = bnorm > 0.0 ? (A * x - b).norm() / bnorm : (A * x - b).norm();
  if (!(rel <= 1e-10))
    throw Error(ErrorKind::singular_system, "dense solve residual " + std::to_string(rel));

  SpectralField theta(g.k_max());
  for (Eigen::Index p = 0; p < n; ++p) theta.set_pair(upper[p], {x(2 * p), x(2 * p + 1)});
  return theta;
}

struct RemainderCheck {
  double lhs = 0.0;        ///< |P_{κ,2κ} δθ|^2
  double rhs_shape = 0.0;  ///< grad_inv_sup^2 U^3 κ^{2β}
};

inline RemainderCheck remainder_band_check(const StaticSolveResult& result, double kappa,
                                           const VelocitySpec& vel, const SourceSpec& source) {
  const auto band = dyadic_band(kappa, result.remainder.k_max());
  const double s = source_functionals(source).grad_inv_sup;
  return {band_power(result.remainder, band),
          s * s * std::pow(vel.U, 3) * std::pow(kappa, 2.0 * vel.beta)};
}

}  // namespace bht
