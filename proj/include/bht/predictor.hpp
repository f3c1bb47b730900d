#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "bht/error.hpp"
#include "bht/fields.hpp"
#include "bht/lattice.hpp"

namespace bht {

enum class Target { vartheta, phi1 };

/// (2^x - 1)/x, continued by its limit ln 2 at x = 0.
struct DyadicRatio {
  double value = 0.0;
  bool degenerate = false;  ///< the limit was used
};

inline DyadicRatio dyadic_ratio(double x) {
  if (std::abs(x) < 1e-12) return {std::numbers::ln2, true};
  return {std::expm1(x * std::numbers::ln2) / x, false};
}

struct Prediction {
  double value = 0.0;
  bool below_validity = false;
  bool degenerate_denominator = false;
};

/// E|φ^{(1)}_k|^2 = U^2 Σ_j γ_j^2 (k∧j)^2 |k-j|^{2β}, divided by |k|^4 for ϑ.
/// Exact for an untruncated velocity; flagged below |k| = 2κ_g, where the
/// variance argument no longer applies.
inline Prediction expected_mode_power(WaveVector k, const SourceSpec& source, double U, double beta,
                                      Target target = Target::phi1) {
  require(!k.is_zero(), ErrorKind::invalid_argument, "k = 0 carries no coefficient");
  double sum = 0.0;
  for (const auto& j : source.support()) {
    const WaveVector m = k - j;
    if (m.is_zero()) continue;
    const double g = source.gamma(j);
    const double w = double(wedge(k, j));
    sum += g * g * w * w * std::pow(double(m.norm2()), beta);
  }
  sum *= U * U;
  if (target == Target::vartheta) sum /= double(k.norm2()) * double(k.norm2());
  return {sum, k.norm() <= 2.0 * source.kappa_g, false};
}

/// Σ over the band of expected_mode_power: the exact lattice expectation of
/// the band power (before the |k-j| ≈ |k| and sum ≈ integral steps).
inline double lattice_band_expectation(const DyadicBand& band, const SourceSpec& source, double U,
                                       double beta, Target target) {
  double sum = 0.0;
  for (const auto& k : band.members) sum += expected_mode_power(k, source, U, beta, target).value;
  return sum;
}

/// π G0 ((2^{x}-1)/x) U^2 κ^{x}, x = 2β+4 for φ^{(1)} and 2β for ϑ.
inline Prediction expected_band_power(double kappa, const SourceSpec& source, double U, double beta,
                                      Target target) {
  const double x = target == Target::phi1 ? 2.0 * beta + 4.0 : 2.0 * beta;
  const auto ratio = dyadic_ratio(x);
  const double G0 = source_functionals(source).G0;
  return {std::numbers::pi * G0 * ratio.value * U * U * std::pow(kappa, x),
          kappa <= 2.0 * source.kappa_g, ratio.degenerate};
}

/// (π G1 / 2) ((2^{x}-1)/x) U^4 κ^{x}, x = 4β+6 for φ^{(1)} and 4β-2 for ϑ.
inline Prediction variance_band_bound(double kappa, const SourceSpec& source, double U, double beta,
                                      Target target) {
  const double x = target == Target::phi1 ? 4.0 * beta + 6.0 : 4.0 * beta - 2.0;
  const auto ratio = dyadic_ratio(x);
  const double G1 = source_functionals(source).G1;
  return {0.5 * std::numbers::pi * G1 * ratio.value * std::pow(U, 4) * std::pow(kappa, x),
          kappa <= 2.0 * source.kappa_g, ratio.degenerate};
}

/// Per-mode envelope Γ(|k|; β) = |k|^{-2} min{2κ_g, (2κ_g)^{-β} |k|^{β+1}}.
inline double gamma_envelope(double k_mag, double beta, double kappa_g) {
  require(k_mag >= 1.0, ErrorKind::invalid_argument, "gamma_envelope needs |k| >= 1");
  const double two_kg = 2.0 * kappa_g;
  return std::min(two_kg, std::pow(two_kg, -beta) * std::pow(k_mag, beta + 1.0)) / (k_mag * k_mag);
}

/// Bound function for Σ_{|m| <= η|k|} |m|^{β+1} ≲ 2π M_β(k; η).
inline double m_beta(double k_mag, double eta, double beta) {
  require(eta > 0.0 && eta < 1.0, ErrorKind::invalid_argument, "eta must lie in (0, 1)");
  const double r = eta * k_mag;
  require(r > 1.0, ErrorKind::invalid_argument, "m_beta needs eta |k| > 1");
  if (beta > -3.0) return std::pow(r, beta + 3.0) / (beta + 3.0);
  if (beta == -3.0) return std::log(r);
  return 1.0 / std::abs(beta + 3.0);
}

/// Lattice sum vs annulus integral for Σ_{κ<=|k|<2κ} (k∧j)^2 |k|^{2β}.
struct AppendixRow {
  WaveVector j;
  double kappa = 0.0;
  double beta = 0.0;
  double lattice_sum = 0.0;
  double integral = 0.0;
  double error = 0.0;
  double bound_shape = 0.0;       ///< |j|^2 κ^{2β+1}
  double cell_bound_shape = 0.0;  ///< |j|^2 κ^{2β+3}, what the unit-cell estimate delivers
};

inline AppendixRow verify_appendix_bound(WaveVector j, double kappa, double beta) {
  AppendixRow row{j, kappa, beta};
  const auto band = dyadic_band(kappa, static_cast<int>(std::ceil(2.0 * kappa)));
  for (const auto& k : band.members) {
    const double w = double(wedge(k, j));
    row.lattice_sum += w * w * std::pow(double(k.norm2()), beta);
  }
  const double j2 = double(j.norm2());
  row.integral = std::numbers::pi * j2 * dyadic_ratio(2.0 * beta + 4.0).value *
                 std::pow(kappa, 2.0 * beta + 4.0);
  row.error = std::abs(row.lattice_sum - row.integral);
  row.bound_shape = j2 * std::pow(kappa, 2.0 * beta + 1.0);
  row.cell_bound_shape = j2 * std::pow(kappa, 2.0 * beta + 3.0);
  return row;
}

/// (π/4)(3 j_x^2 n_x^2 + j_x^2 n_y^2 + j_y^2 n_x^2 + 3 j_y^2 n_y^2 + 4 j_x j_y n_x n_y), the
/// closed form of ∫_0^{2π} (j_x sin w - j_y cos w)^2 (n_x sin w - n_y cos w)^2 dw.
inline double angular_quartic_closed_form(WaveVector j, WaveVector n) {
  const double jx = j.x, jy = j.y, nx = n.x, ny = n.y;
  return 0.25 * std::numbers::pi *
         (3 * jx * jx * nx * nx + jx * jx * ny * ny + jy * jy * nx * nx + 3 * jy * jy * ny * ny +
          4 * jx * jy * nx * ny);
}

inline constexpr double kSplitEta = 0.1;

/// Computable ingredients of the smallness conditions for the static
/// iteration and the Picard iteration.
struct SmallnessReport {
  double sup_norm_u = 0.0;  ///< Σ_k |u_k|
  double alpha = 0.0;       ///< (Σ_k |u_k|)^2 with c1 = 1
  bool sup_gate = false;    ///< alpha < 1

  double sum_gamma_lattice = 0.0;   ///< Σ_{0<|j|<=K} |j| Γ_j
  double sum_gamma_estimate = 0.0;  ///< 2π(2κ_g)^2 + 2π·2κ_g/|β+1|

  double c4_lattice = 0.0;  ///< sup_k S(k) / (|k|^2 Γ_k) with S summed on the lattice
  bool c4_gate = false;     ///< sqrt(U) c4_lattice <= 1/2

  double c4_analytic = 0.0;     ///< same sup with S replaced by the four-part split bound
  bool analytic_gate = false;   ///< sqrt(U) c4_analytic <= 1/2 (informational)
  double split_bound_ratio = 0.0;  ///< max_k S(k) / split bound(k); <= 1 when the split holds

  bool all_pass() const { return sup_gate && c4_gate; }
};

namespace detail {

/// S(k) = Σ_{j≠k, 0<|j|<=K} |k∧j| |k-j|^β Γ_j
inline double envelope_sum(WaveVector k, const Lattice& lat, double beta, double kappa_g) {
  double s = 0.0;
  for (const auto& j : lat.modes()) {
    const WaveVector m = k - j;
    if (m.is_zero()) continue;
    s += std::abs(double(wedge(k, j))) * std::pow(double(m.norm2()), 0.5 * beta) *
         gamma_envelope(j.norm(), beta, kappa_g);
  }
  return s;
}

}  // namespace detail

inline SmallnessReport smallness_diagnostics(const VelocitySpec& vel, const SourceSpec& source) {
  if (!(vel.beta < -2.0))
    throw Error(ErrorKind::out_of_theory, "beta = " + std::to_string(vel.beta) +
                                              " is outside the theory (requires beta < -2)");
  vel.validate();
  source.validate();
  const double beta = vel.beta;
  const double kg = source.kappa_g;
  const auto lat = lattice_for(vel.k_max);

  SmallnessReport r;
  for (const auto& k : lat->modes()) r.sup_norm_u += vel.amplitude(k) * k.norm();
  r.alpha = r.sup_norm_u * r.sup_norm_u;
  r.sup_gate = r.alpha < 1.0;

  for (const auto& j : lat->modes()) r.sum_gamma_lattice += j.norm() * gamma_envelope(j.norm(), beta, kg);
  r.sum_gamma_estimate = 2.0 * std::numbers::pi * (4.0 * kg * kg + 2.0 * kg / std::abs(beta + 1.0));

  // Sample k along the axis and the diagonal; S depends only weakly on direction.
  std::vector<WaveVector> probes;
  for (int n = 1; n <= vel.k_max; ++n) {
    probes.push_back({n, 0});
    if (2L * n * n <= long(vel.k_max) * vel.k_max) probes.push_back({n, n});
  }
  const double eta = kSplitEta;
  const double c1 = std::pow(eta, beta) * r.sum_gamma_estimate;
  const double c2 = 2.0 * std::numbers::pi * std::pow(1.0 - eta, beta + 1.0);
  for (const auto& k : probes) {
    const double km = k.norm();
    const double denom = km * km * gamma_envelope(km, beta, kg);
    const double s = detail::envelope_sum(k, *lat, beta, kg);
    r.c4_lattice = std::max(r.c4_lattice, s / denom);

    double bound = 0.0;
    if (km <= 2.0 * kg) {
      bound = 2.0 * kg / std::abs(beta + 2.0);
    } else {
      const double m = eta * km > 1.0 ? m_beta(km, eta, beta) : 0.0;
      bound = c1 * std::pow(km, beta + 1.0) + c2 * m * km * gamma_envelope(km, beta, kg);
      r.split_bound_ratio = std::max(r.split_bound_ratio, s / bound);
    }
    r.c4_analytic = std::max(r.c4_analytic, bound / denom);
  }
  r.c4_gate = std::sqrt(vel.U) * r.c4_lattice <= 0.5;
  r.analytic_gate = std::sqrt(vel.U) * r.c4_analytic <= 0.5;
  return r;
}

}  // namespace bht
