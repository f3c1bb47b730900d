#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bht/advection.hpp"
#include "bht/error.hpp"
#include "bht/fields.hpp"
#include "bht/lattice.hpp"
#include "bht/phases.hpp"
#include "bht/predictor.hpp"
#include "bht/static_solver.hpp"

namespace bht {

/// (e^z - 1)/z
inline double exp_phi1(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

/// (e^z - 1 - z)/z^2
inline double exp_phi2(double z) {
  if (std::abs(z) < 0.1) {
    double term = 0.5, sum = 0.0;  // Σ z^n / (n+2)!
    for (int n = 0; n < 12; ++n) {
      sum += term;
      term *= z / double(n + 3);
    }
    return sum;
  }
  return (std::expm1(z) - z) / (z * z);
}

/// Weights w_i with ∫_{t_0}^{t_N} e^{(s - t_N) a} f(s) ds = Σ_i w_i f(t_i) for f
/// piecewise linear on the grid; the exponential factor is integrated exactly.
inline std::vector<double> damped_trapezoid_weights(double a, std::span<const double> times) {
  std::vector<double> w(times.size(), 0.0);
  if (times.size() < 2) return w;
  const double t_end = times.back();
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double h = times[i + 1] - times[i];
    const double z = -a * h;
    const double decay = std::exp(-a * (t_end - times[i + 1]));
    const double p1 = exp_phi1(z), p2 = exp_phi2(z);
    w[i] += decay * h * (p1 - p2);
    w[i + 1] += decay * h * p2;
  }
  return w;
}

struct TimeSolveConfig {
  double dt = 0.0;
  double t_end = 1.0;
  int order = 1;
  double picard_tol = 1e-12;  ///< relative to |θ⁽⁰⁾|
  int picard_max_iter = 100;
  int output_stride = 1;      ///< store every n-th step in evolve_full
  int points_per_scale = 20;  ///< quadrature points per min(1/|k|^2, 1/χ)

  static TimeSolveConfig defaults(int k_max, double t_end) {
    TimeSolveConfig c;
    c.dt = 1.0 / (2.0 * double(k_max) * double(k_max));
    c.t_end = t_end;
    return c;
  }

  void validate(int k_max) const {
    require(dt > 0.0 && t_end > 0.0, ErrorKind::invalid_argument, "dt and t_end must be positive");
    require(order == 1 || order == 2, ErrorKind::invalid_argument, "integrator order must be 1 or 2");
    require(dt * double(k_max) * double(k_max) <= 0.5 + 1e-12, ErrorKind::invalid_argument,
            "dt must satisfy dt * K_max^2 <= 1/2");
    require(picard_tol > 0.0 && picard_max_iter >= 1 && output_stride >= 1 && points_per_scale >= 1,
            ErrorKind::invalid_argument, "invalid solver settings");
  }

  int steps() const { return std::max(1, static_cast<int>(std::ceil(t_end / dt - 1e-9))); }
  double step() const { return t_end / steps(); }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
};

namespace detail {

inline VectorField velocity_at(const PhaseProcess& process, const VelocitySpec& vel, double t) {
  return build_velocity(vel, process.at(t, vel.k_max));
}

inline void check_gate(const PhaseProcess& process, const VelocitySpec& vel) {
  // |u_k| does not depend on the phases, so the bound holds for all t.
  const double bound = sup_norm_bound(velocity_at(process, vel, 0.0));
  if (!(bound * bound < 1.0))
    throw Error(ErrorKind::convergence_gate,
                "(sum |u_k|)^2 = " + std::to_string(bound * bound) + " is not below 1");
}

inline void check_finite(const SpectralField& f, double t) {
  for (const auto& c : f.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw Error(ErrorKind::unstable_step, "non-finite coefficient at t = " + std::to_string(t));
}

}  // namespace detail

/// Exponential time differencing for ∂_t θ + u·∇θ = Δθ + g from θ(0) = -Δ^{-1} g.
/// Order 1: θ_k ← e^{-|k|^2 h} θ_k + h φ1(-|k|^2 h) [g - u·∇θ]_k.
/// Order 2 adds the ETD2RK correction h φ2(-|k|^2 h) (N(t) - N(t + h)).
inline Trajectory evolve_full(const PhaseProcess& process, const VelocitySpec& vel,
                              const SpectralField& g, const TimeSolveConfig& cfg) {
  vel.validate();
  cfg.validate(vel.k_max);
  require(g.k_max() == vel.k_max, ErrorKind::truncation_mismatch, "source and velocity truncations differ");
  detail::check_gate(process, vel);

  AdvectionOperator op(vel.k_max);
  const auto& lat = g.lattice();
  const int steps = cfg.steps();
  const double h = cfg.step();

  std::vector<double> decay(lat.size(), 0.0), w1(lat.size(), 0.0), w2(lat.size(), 0.0);
  for (const auto& k : lat.modes()) {
    const double a = double(k.norm2());
    const std::size_t at = lat.index(k);
    decay[at] = std::exp(-a * h);
    w1[at] = h * exp_phi1(-a * h);
    w2[at] = h * exp_phi2(-a * h);
  }

  Trajectory out;
  SpectralField theta = base_solution(g);
  out.times.push_back(0.0);
  out.states.push_back(theta);

  VectorField u_now = detail::velocity_at(process, vel, 0.0);
  for (int n = 0; n < steps; ++n) {
    const double t = n * h;
    const SpectralField n0 = op.apply(u_now, theta);
    SpectralField next(vel.k_max);
    auto nd = next.data();
    const auto td = theta.data();
    const auto gd = g.data();
    const auto n0d = n0.data();
    for (const auto& k : lat.modes()) {
      const std::size_t at = lat.index(k);
      nd[at] = decay[at] * td[at] + w1[at] * (gd[at] - n0d[at]);
    }
    VectorField u_next = detail::velocity_at(process, vel, t + h);
    if (cfg.order == 2) {
      const SpectralField n1 = op.apply(u_next, next);
      const auto n1d = n1.data();
      for (const auto& k : lat.modes()) {
        const std::size_t at = lat.index(k);
        nd[at] += w2[at] * (n0d[at] - n1d[at]);
      }
    }
    detail::check_finite(next, t + h);
    theta = std::move(next);
    u_now = std::move(u_next);
    if ((n + 1) % cfg.output_stride == 0 || n + 1 == steps) {
      out.times.push_back(t + h);
      out.states.push_back(theta);
    }
  }
  return out;
}

struct PicardResult {
  Trajectory trajectory;      ///< converged iterate on every grid time
  Trajectory first_iterate;   ///< θ⁽¹⁾ on every grid time
  int iterations = 0;
  std::vector<double> increments;  ///< max_t |θ⁽ⁿ⁾(t) - θ⁽ⁿ⁻¹⁾(t)|
  std::vector<double> energies;    ///< ∫_0^T |∇(θ⁽ⁿ⁾ - θ⁽ⁿ⁻¹⁾)|^2 ds

  std::vector<double> energy_ratios() const {
    std::vector<double> out;
    for (std::size_t n = 1; n < energies.size(); ++n)
      if (energies[n - 1] > 0.0) out.push_back(energies[n] / energies[n - 1]);
    return out;
  }
};

/// Picard iteration θ⁽ⁿ⁺¹⁾(t) = -Δ^{-1} g - ∫_0^t e^{(t-s)Δ}[u(s)·∇θ⁽ⁿ⁾(s)] ds on the
/// uniform grid of `cfg`, with the forcing linear between grid points and the
/// heat kernel integrated exactly.
inline PicardResult picard_iterate_time(const PhaseProcess& process, const VelocitySpec& vel,
                                        const SpectralField& g, const TimeSolveConfig& cfg) {
  vel.validate();
  cfg.validate(vel.k_max);
  require(g.k_max() == vel.k_max, ErrorKind::truncation_mismatch, "source and velocity truncations differ");
  detail::check_gate(process, vel);

  AdvectionOperator op(vel.k_max);
  const auto& lat = g.lattice();
  const int steps = cfg.steps();
  const double h = cfg.step();

  std::vector<double> times(steps + 1);
  for (int i = 0; i <= steps; ++i) times[i] = i * h;

  std::vector<double> decay(lat.size(), 0.0), wa(lat.size(), 0.0), wb(lat.size(), 0.0);
  for (const auto& k : lat.modes()) {
    const double a = double(k.norm2());
    const std::size_t at = lat.index(k);
    decay[at] = std::exp(-a * h);
    wa[at] = h * (exp_phi1(-a * h) - exp_phi2(-a * h));
    wb[at] = h * exp_phi2(-a * h);
  }

  const SpectralField theta0 = base_solution(g);
  const double scale = l2_norm(theta0);
  std::vector<SpectralField> current(steps + 1, theta0);

  PicardResult result;
  bool converged = false;
  for (int n = 1; n <= cfg.picard_max_iter; ++n) {
    std::vector<SpectralField> forcing;
    forcing.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i)
      forcing.push_back(g - op.apply(detail::velocity_at(process, vel, times[i]), current[i]));

    std::vector<SpectralField> next;
    next.reserve(steps + 1);
    next.push_back(theta0);
    for (int i = 0; i < steps; ++i) {
      SpectralField y(vel.k_max);
      auto yd = y.data();
      const auto pd = next.back().data();
      const auto f0 = forcing[i].data();
      const auto f1 = forcing[i + 1].data();
      for (const auto& k : lat.modes()) {
        const std::size_t at = lat.index(k);
        yd[at] = decay[at] * pd[at] + wa[at] * f0[at] + wb[at] * f1[at];
      }
      detail::check_finite(y, times[i + 1]);
      next.push_back(std::move(y));
    }

    double inc = 0.0, energy = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const SpectralField d = next[i] - current[i];
      inc = std::max(inc, l2_norm(d));
      const double e = gradient_norm_squared(d);
      energy += (i == 0 || i == steps) ? 0.5 * h * e : h * e;
    }
    result.increments.push_back(inc);
    result.energies.push_back(energy);
    current = std::move(next);
    if (n == 1) result.first_iterate = {times, current};
    result.iterations = n;

    if (inc <= cfg.picard_tol * scale) {
      converged = true;
      break;
    }
    const auto& e = result.energies;
    const double floor = 1e6 * std::numeric_limits<double>::epsilon() * scale * scale;
    if (n >= 3 && e[n - 2] > floor && e[n - 1] >= e[n - 2])
      throw Error(ErrorKind::divergent_picard,
                  "energy of successive iterates is not contracting at iteration " + std::to_string(n));
  }
  if (!converged)
    throw Error(ErrorKind::divergent_picard,
                "no convergence in " + std::to_string(cfg.picard_max_iter) + " iterations");
  result.trajectory = {times, std::move(current)};
  return result;
}

namespace detail {

struct Theta1Term {
  WaveVector velocity_mode;  ///< p = k - m
  Complex coefficient;       ///< (k∧m) U |p|^β θ⁽⁰⁾_m
};

/// φ⁽¹⁾_k(s) = Σ_m (k∧m) ψ_{k-m}(s) θ⁽⁰⁾_m, with ψ_p(s) = U|p|^β e^{iφ_p(s)}.
inline std::vector<Theta1Term> theta1_terms(const VelocitySpec& vel, const SpectralField& g, WaveVector k) {
  std::vector<Theta1Term> terms;
  const auto vlat = lattice_for(vel.k_max);
  for (const auto& m : g.lattice().modes()) {
    const Complex gm = g[m];
    if (gm == Complex{}) continue;
    const WaveVector p = k - m;
    if (!vlat->contains(p)) continue;
    const double w = double(wedge(k, m));
    if (w == 0.0) continue;
    terms.push_back({p, w * vel.amplitude(p) * gm / double(m.norm2())});
  }
  return terms;
}

inline double max_rate_scale(const CorrelationLaw& law, const std::vector<Theta1Term>& terms) {
  if (law.shape == CorrelationShape::constant_one) return 0.0;
  double chi = 0.0;
  for (const auto& t : terms) chi = std::max(chi, law.chi_k(t.velocity_mode));
  return chi;
}

inline double resolution_step(double a, double chi, int points) {
  const double scale = chi > 0.0 ? std::min(1.0 / a, 1.0 / chi) : 1.0 / a;
  return scale / points;
}

}  // namespace detail

/// First-order tracer coefficient ϑ_k(t) for sampled phase paths:
/// ϑ_k(t) = Σ_m (k∧m) U|k-m|^β θ⁽⁰⁾_m ∫_0^t e^{(s-t)|k|^2 + iφ_{k-m}(s)} ds
/// with the trapezoid rule on e^{iφ} and the exponential factor integrated exactly.
inline Complex theta1_path(const PhaseProcess& process, const VelocitySpec& vel, const SpectralField& g,
                           WaveVector k, std::span<const double> times, int points_per_scale = 20) {
  require(!k.is_zero(), ErrorKind::invalid_argument, "k = 0");
  check_time_grid(times);
  require(times.front() == 0.0, ErrorKind::invalid_argument, "time grid must start at 0");
  if (times.size() == 1) return {};

  const auto terms = detail::theta1_terms(vel, g, k);
  const double a = double(k.norm2());
  double h_max = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) h_max = std::max(h_max, times[i] - times[i - 1]);
  const double need = detail::resolution_step(a, detail::max_rate_scale(process.law(), terms), points_per_scale);
  if (h_max > need * (1.0 + 1e-12))
    throw Error(ErrorKind::under_resolved, "grid step " + std::to_string(h_max) + " exceeds " +
                                               std::to_string(need));

  const auto w = damped_trapezoid_weights(a, times);
  Complex sum{};
  for (const auto& term : terms) {
    Complex integral{};
    for (std::size_t i = 0; i < times.size(); ++i)
      integral += w[i] * std::polar(1.0, process.phase(term.velocity_mode, times[i]));
    sum += term.coefficient * integral;
  }
  return sum;
}

/// Uniform grid on [0, t] fine enough for theta1_path at every k with |k|^2 <= a_max.
inline std::vector<double> theta1_grid(double t, double a_max, double chi_max, int points_per_scale = 20) {
  if (t == 0.0) return {0.0};
  const double h = detail::resolution_step(a_max, chi_max, points_per_scale);
  const int n = std::max(1, static_cast<int>(std::ceil(t / h - 1e-9)));
  std::vector<double> times(n + 1);
  for (int i = 0; i <= n; ++i) times[i] = t * double(i) / n;
  return times;
}

/// ϑ_k(t) for every member of a band, sharing one time grid and one set of
/// sampled e^{iφ_p(t_i)} per velocity mode.
inline std::vector<Complex> theta1_band(const PhaseProcess& process, const VelocitySpec& vel,
                                        const SpectralField& g, const DyadicBand& band, double t,
                                        int points_per_scale = 20) {
  std::vector<std::vector<detail::Theta1Term>> terms;
  terms.reserve(band.members.size());
  double a_max = 1.0, chi_max = 0.0;
  for (const auto& k : band.members) {
    terms.push_back(detail::theta1_terms(vel, g, k));
    a_max = std::max(a_max, double(k.norm2()));
    chi_max = std::max(chi_max, detail::max_rate_scale(process.law(), terms.back()));
  }
  const auto times = theta1_grid(t, a_max, chi_max, points_per_scale);
  std::vector<Complex> out(band.members.size());
  if (times.size() == 1) return out;

  const auto vlat = lattice_for(vel.k_max);
  std::vector<int> slot(vlat->size(), -1);
  std::vector<std::vector<Complex>> cis;
  for (const auto& ts : terms) {
    for (const auto& term : ts) {
      int& s = slot[vlat->index(term.velocity_mode)];
      if (s >= 0) continue;
      s = static_cast<int>(cis.size());
      std::vector<Complex> values(times.size());
      for (std::size_t i = 0; i < times.size(); ++i)
        values[i] = std::polar(1.0, process.phase(term.velocity_mode, times[i]));
      cis.push_back(std::move(values));
    }
  }

  std::map<long, std::vector<double>> weights;
  for (std::size_t b = 0; b < band.members.size(); ++b) {
    const long k2 = band.members[b].norm2();
    auto it = weights.find(k2);
    if (it == weights.end()) it = weights.emplace(k2, damped_trapezoid_weights(double(k2), times)).first;
    const auto& w = it->second;
    Complex sum{};
    for (const auto& term : terms[b]) {
      const auto& values = cis[slot[vlat->index(term.velocity_mode)]];
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        re += w[i] * values[i].real();
        im += w[i] * values[i].imag();
      }
      sum += term.coefficient * Complex{re, im};
    }
    out[b] = sum;
  }
  return out;
}

enum class PowerMethod { path_mc, quadrature, series };

struct ModePowerEstimate {
  WaveVector k;
  double t = 0.0;
  double value = 0.0;
  PowerMethod method = PowerMethod::quadrature;
  int series_terms = 0;
  double std_error = 0.0;  ///< path-MC only
};

namespace detail {

template <class F>
double integrate(F f, double lo, double hi, double tol = 1e-14, unsigned depth = 20) {
  if (!(hi > lo)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, depth, tol);
}

}  // namespace detail

/// I(t) = ∫_0^t∫_0^t e^{(s+r-2t)a} Φ(χ|s-r|) ds dr through the reduced form
/// (1/a^2) ∫_0^{at} Φ(χ v/a) (e^{-v} - e^{-(2at-v)}) dv. t = ∞ is accepted.
inline double damped_correlation_integral(double a, const CorrelationLaw& law, double chi, double t) {
  require(a > 0.0 && t >= 0.0, ErrorKind::invalid_argument, "need a > 0 and t >= 0");
  constexpr double tail = 60.0;  // e^{-60} is below double resolution
  const double at = a * t;
  const double upper = std::isinf(t) ? tail : std::min(at, tail);
  auto f = [&](double v) {
    const double far = std::isinf(t) ? 0.0 : std::exp(-(2.0 * at - v));
    return law.phi(chi * v / a) * (std::exp(-v) - far);
  };
  double sum = 0.0;
  const double cuts[] = {0.0, 1.0, 5.0, 20.0, upper};
  for (int i = 0; i + 1 < 5; ++i) {
    const double lo = std::min(cuts[i], upper), hi = std::min(cuts[i + 1], upper);
    sum += detail::integrate(f, lo, hi);
  }
  return sum / (a * a);
}

/// The same double integral by nested adaptive quadrature in (s, r), used as
/// an independent route. Evaluated in reflected variables s' = t - s.
inline double damped_correlation_integral_2d(double a, const CorrelationLaw& law, double chi, double t) {
  require(a > 0.0 && t > 0.0 && std::isfinite(t), ErrorKind::invalid_argument, "need a > 0, finite t > 0");
  auto inner = [&](double r) {
    auto f = [&](double s) { return std::exp(-(s + r) * a) * law.phi(chi * std::abs(s - r)); };
    return detail::integrate(f, 0.0, r, 1e-13, 8) + detail::integrate(f, r, t, 1e-13, 8);
  };
  double sum = 0.0;
  const double cuts[] = {0.0, std::min(t, 1.0 / a), std::min(t, 10.0 / a), std::min(t, 40.0 / a), t};
  for (int i = 0; i + 1 < 5; ++i) sum += detail::integrate(inner, cuts[i], cuts[i + 1], 1e-12, 10);
  return sum;
}

/// U^2 Σ_j γ_j^2 (k∧j)^2 |k-j|^{2β} I(t; |k|^2, χ_{k-j})
inline ModePowerEstimate mode_power_quadrature(WaveVector k, const CorrelationLaw& law,
                                               const SourceSpec& source, double U, double beta, double t) {
  require(t > 0.0, ErrorKind::invalid_argument, "t must be positive");
  const double a = double(k.norm2());
  double sum = 0.0;
  for (const auto& j : source.support()) {
    const WaveVector p = k - j;
    if (p.is_zero()) continue;
    const double g = source.gamma(j), w = double(wedge(k, j));
    if (w == 0.0) continue;
    sum += g * g * w * w * std::pow(double(p.norm2()), beta) *
           damped_correlation_integral(a, law, law.chi_k(p), t);
  }
  return {k, t, U * U * sum, PowerMethod::quadrature, 0, 0.0};
}

struct SeriesEstimate {
  ModePowerEstimate estimate;       ///< partial sum through n_terms
  std::vector<double> terms;        ///< contribution of each order m = 0..n_terms
  double remainder = 0.0;           ///< integral remainder after n_terms
  double max_epsilon = 0.0;         ///< max_j χ_{k-j}/|k|^2
  bool below_validity = false;      ///< max_epsilon > 1/10
};

/// Asymptotic expansion of lim_{t→∞} E|ϑ_k(t)|^2 in ε = χ_{k-j}/|k|^2:
/// Σ_j S_j [Σ_{m<=n} ε^m Φ^{(m)}(0) + ε^{n+1} ∫_0^∞ e^{-v} Φ^{(n+1)}(εv) dv],
/// S_j = U^2 γ_j^2 (k∧j)^2 |k-j|^{2β} / |k|^4. Partial sum plus remainder equals
/// the t = ∞ quadrature.
inline SeriesEstimate mode_power_series(WaveVector k, const CorrelationLaw& law, const SourceSpec& source,
                                        double U, double beta, int n_terms) {
  require(n_terms >= 0 && n_terms < CorrelationLaw::max_derivative, ErrorKind::invalid_argument,
          "n_terms out of range");
  const double a = double(k.norm2());
  SeriesEstimate s;
  s.terms.assign(n_terms + 1, 0.0);
  for (const auto& j : source.support()) {
    const WaveVector p = k - j;
    if (p.is_zero()) continue;
    const double g = source.gamma(j), w = double(wedge(k, j));
    if (w == 0.0) continue;
    const double summand = U * U * g * g * w * w * std::pow(double(p.norm2()), beta) / (a * a);
    const double eps = law.chi_k(p) / a;
    s.max_epsilon = std::max(s.max_epsilon, eps);
    double power = 1.0;
    for (int m = 0; m <= n_terms; ++m) {
      s.terms[m] += summand * power * law.derivative_at_zero(m);
      power *= eps;
    }
    auto f = [&](double v) { return std::exp(-v) * law.derivative(n_terms + 1, eps * v); };
    double tail = 0.0;
    const double cuts[] = {0.0, 1.0, 5.0, 20.0, 60.0};
    for (int i = 0; i + 1 < 5; ++i) tail += detail::integrate(f, cuts[i], cuts[i + 1]);
    s.remainder += summand * power * tail;
  }
  for (double term : s.terms) s.estimate.value += term;
  s.estimate.k = k;
  s.estimate.t = std::numeric_limits<double>::infinity();
  s.estimate.method = PowerMethod::series;
  s.estimate.series_terms = n_terms;
  s.below_validity = s.max_epsilon > 0.1;
  return s;
}

struct BandSeries {
  double value = 0.0;             ///< π G0 U^2 κ^{2β} Σ_n bracket[n]
  std::vector<double> bracket;    ///< (2^{x_n}-1)/x_n Φ^{(n)}(0) χ^n κ^{(η-2)n}
  std::vector<bool> degenerate;   ///< x_n = 2β + n(η-2) vanished
};

/// Band-summed correction series for χ_k = χ |k|^η.
inline BandSeries band_correction_series(double kappa, const CorrelationLaw& law, const SourceSpec& source,
                                         double U, double beta, int n_terms) {
  law.validate();
  require(n_terms >= 0 && n_terms <= CorrelationLaw::max_derivative, ErrorKind::invalid_argument,
          "n_terms out of range");
  BandSeries out;
  const double G0 = source_functionals(source).G0;
  double sum = 0.0;
  for (int n = 0; n <= n_terms; ++n) {
    const double x = 2.0 * beta + n * (law.eta - 2.0);
    const auto ratio = dyadic_ratio(x);
    const double term = ratio.value * law.derivative_at_zero(n) * std::pow(law.chi, n) *
                        std::pow(kappa, (law.eta - 2.0) * n);
    out.bracket.push_back(term);
    out.degenerate.push_back(ratio.degenerate);
    sum += term;
  }
  out.value = std::numbers::pi * G0 * U * U * std::pow(kappa, 2.0 * beta) * sum;
  return out;
}

}  // namespace bht
