// Acceptance suite. One line per criterion:
//   C<n> PASS|FAIL  <summary>
// followed by indented detail lines. Exit status is nonzero if any selected
// criterion fails.
//
//   acceptance                 run all criteria
//   acceptance --criterion 4   run one

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "bht/bht.hpp"

using namespace bht;

namespace {

struct Outcome {
  bool pass = true;
  std::string summary;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
  void info(const std::string& what) { details.push_back("     " + what); }
};

std::string f(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

int threads_from_env() {
  if (const char* env = std::getenv("BHT_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

constexpr std::uint64_t kSeed = 20240611;

EnsembleConfig reference_ensemble(double beta, double U, std::vector<double> kappas) {
  EnsembleConfig c;
  c.n_samples = 400;
  c.master_seed = kSeed;
  c.velocity = {U, beta, 128};
  c.source.kappa_g = 4.0;
  c.kappas = std::move(kappas);
  c.threads = threads_from_env();
  return c;
}

// Criterion 1: band mean against the closed-form band law.
Outcome criterion1() {
  Outcome o;
  const auto r = run_static_ensemble(reference_ensemble(-3.0, 0.01, {8, 16, 32}));
  for (std::size_t b = 0; b < r.stats.size(); ++b) {
    const auto& s = r.stats[b];
    const auto& c = r.report.bands[b];
    o.check(c.within_3se, f("kappa=%g mean=%.6e prediction=%.6e |diff|=%.3e 3SE=%.3e", s.kappa, s.sample_mean,
                            c.expected, std::abs(s.sample_mean - c.expected), 3 * s.std_error));
    if (s.kappa == 16) o.check(c.rel_error <= 0.15, f("kappa=16 relative error %.4f <= 0.15", c.rel_error));
    if (s.kappa == 32) o.check(c.rel_error <= 0.10, f("kappa=32 relative error %.4f <= 0.10", c.rel_error));
    o.info(f("kappa=%g lattice expectation=%.6e z_lattice=%.2f", s.kappa, c.lattice_expected, c.z_lattice));
  }
  o.summary = "static band mean vs closed-form band law (3 SE, 15%/10%)";
  return o;
}

// Criterion 2: fitted band-power exponent.
Outcome criterion2() {
  Outcome o;
  const std::vector<double> ladder{8, 11, 16, 22, 32};
  {
    const auto r = run_static_ensemble(reference_ensemble(-3.0, 0.01, ladder));
    const auto fit = fit_scaling_exponent(r.stats);
    o.check(std::abs(fit.slope + 6.0) <= 0.3, f("beta=-3 slope %.4f (stderr %.4f), want -6 +- 0.3", fit.slope, fit.stderr_));
    std::vector<double> lat;
    for (const auto& c : r.report.bands) lat.push_back(c.lattice_expected);
    o.info(f("beta=-3 slope of the exact lattice expectation %.4f", fit_scaling_exponent(ladder, lat).slope));
  }
  {
    // The sup-norm gate needs U below 0.01 at beta = -2.5; band power scales as U^2.
    const auto r = run_static_ensemble(reference_ensemble(-2.5, 0.002, ladder));
    const auto fit = fit_scaling_exponent(r.stats);
    o.check(std::abs(fit.slope + 5.0) <= 0.3, f("beta=-2.5 slope %.4f (stderr %.4f), want -5 +- 0.3", fit.slope, fit.stderr_));
  }
  o.summary = "log-log slope of band power over kappa in {8,11,16,22,32}";
  return o;
}

// Criterion 3: one-sided variance bound and the concentration rate.
Outcome criterion3() {
  Outcome o;
  const auto cfg = reference_ensemble(-3.0, 0.01, {8, 11, 16, 22, 32});
  const auto r = run_static_ensemble(cfg);
  for (std::size_t b = 0; b < r.stats.size(); ++b) {
    const auto& s = r.stats[b];
    const auto& c = r.report.bands[b];
    o.check(c.variance_ok, f("kappa=%g variance=%.4e bound=%.4e ratio=%.3f <= 2", s.kappa, s.sample_variance,
                             c.var_bound, s.sample_variance / c.var_bound));
  }
  const auto& fl = *r.report.fluctuation_fit;
  o.check(std::abs(fl.slope + 1.0) <= 0.4, f("relative-fluctuation slope %.4f, want -1 +- 0.4", fl.slope));
  o.summary = "sample variance <= 2 x bound, std/mean slope";
  return o;
}

// Criterion 4: iterative solve against the dense LU oracle.
Outcome criterion4() {
  Outcome o;
  const VelocitySpec vel{0.01, -3.0, 32};
  const SourceSpec source{};
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto u = build_velocity(vel, sample_static_phases(rng::derive(kSeed, s, 0), vel.k_max));
    const auto g = build_source(source, sample_static_phases(rng::derive(kSeed, s, 1), vel.k_max));
    const auto it = iterate_static(u, g);
    const auto dense = dense_oracle_solve(u, g);
    const double rel = l2_norm(it.theta - dense) / l2_norm(dense);
    worst = std::max(worst, rel);
    o.check(rel <= 1e-10, f("seed %llu: relative L2 difference %.3e (iterations %d)", (unsigned long long)s, rel,
                            it.iterations));
  }
  o.summary = f("iterate_static vs dense LU, K_max=32, 20 seeds, worst %.3e", worst);
  return o;
}

// Criterion 5: envelope and contraction over the criterion-1 realizations.
Outcome criterion5() {
  Outcome o;
  auto cfg = reference_ensemble(-3.0, 0.01, {8, 16, 32});
  cfg.full_theta = true;
  const auto small = smallness_diagnostics(cfg.velocity, cfg.source);
  o.info(f("smallness: alpha=%.4f c4_lattice=%.3f sqrt(U) c4=%.4f", small.alpha, small.c4_lattice,
           std::sqrt(cfg.velocity.U) * small.c4_lattice));
  const auto r = run_static_ensemble(cfg);
  o.check(r.envelope_violations == 0, f("%ld envelope violations over %d realizations (max ratio %.4f)",
                                        r.envelope_violations, cfg.n_samples, r.envelope_max_ratio));
  o.check(r.max_increment_ratio <= 0.5, f("max increment ratio %.4f <= 0.5 (max iterations %d)",
                                          r.max_increment_ratio, r.max_iterations));
  o.summary = "per-mode envelope and contraction of the static iteration";
  return o;
}

// Criterion 6: static kernel identity.
Outcome criterion6() {
  Outcome o;
  const CorrelationLaw frozen{};
  double worst = 0.0;
  for (double a : {1.0, 4.0, 25.0})
    for (double t : {0.1, 1.0, 10.0}) {
      const double exact = std::pow(-std::expm1(-t * a), 2) / (a * a);
      const double r1 = std::abs(damped_correlation_integral(a, frozen, 1.0, t) - exact) / exact;
      const double r2 = std::abs(damped_correlation_integral_2d(a, frozen, 1.0, t) - exact) / exact;
      worst = std::max({worst, r1, r2});
      o.check(r1 <= 1e-10 && r2 <= 1e-10,
              f("|k|^2=%g t=%g reduced %.2e nested %.2e", a, t, r1, r2));
    }
  o.summary = f("double integral vs (1-e^{-t|k|^2})^2/|k|^4, worst %.2e", worst);
  return o;
}

// Criterion 7: static recovery for Gaussian phase correlations.
Outcome criterion7() {
  Outcome o;
  const CorrelationLaw law{CorrelationShape::gaussian, 1.0, 0.0};
  const SourceSpec source{};
  const double U = 0.01, beta = -3.0;
  const double inf = std::numeric_limits<double>::infinity();
  int count = 0, misses = 0;
  double worst = 0.0;
  for (int x = 0; x <= 20; ++x)
    for (int y = -20; y <= 20; ++y) {
      const WaveVector k{x, y};
      if (!in_upper_half(k) || k.norm() < 10.0 || k.norm() > 20.0) continue;
      const double quad = mode_power_quadrature(k, law, source, U, beta, inf).value;
      const double series = mode_power_series(k, law, source, U, beta, 2).estimate.value;
      const double eps = law.chi / double(k.norm2());
      const double rel = std::abs(quad - series) / quad;
      worst = std::max(worst, rel / (2 * eps * eps * eps));
      ++count;
      if (rel > 2 * eps * eps * eps) ++misses;
    }
  o.check(misses == 0, f("%d of %d modes with 10 <= |k| <= 20 exceed 2 eps^3 (worst rel/(2 eps^3) = %.3e)", misses,
                         count, worst));

  const WaveVector k{0, 8};
  const VelocitySpec vel{U, beta, 16};
  const double t = 1.0;
  const int n = 200;
  std::vector<double> values;
  for (int i = 0; i < n; ++i) {
    const PhaseProcess process(rng::derive(kSeed, i, 0), law);
    const auto g = build_source(source, sample_static_phases(rng::derive(kSeed, i, 1), vel.k_max));
    const auto times = theta1_grid(t, double(k.norm2()), law.chi, 20);
    values.push_back(std::norm(theta1_path(process, vel, g, k, times)));
  }
  const auto s = summarize(8.0, 1, values);
  const double quad = mode_power_quadrature(k, law, source, U, beta, t).value;
  const double z = (s.sample_mean - quad) / s.std_error;
  o.check(std::abs(z) <= 4.0, f("path MC k=(0,8) t=1: mean=%.6e quadrature=%.6e SE=%.3e z=%.2f", s.sample_mean,
                                quad, s.std_error, z));
  o.summary = "t->inf quadrature vs two-term series; path MC vs quadrature";
  return o;
}

// Criterion 8: sign and size of the leading time-correlation correction.
Outcome criterion8() {
  Outcome o;
  const double beta = -3.0, U = 0.01, kappa = 4.0;
  const SourceSpec source{};
  const double r0 = dyadic_ratio(2 * beta).value, r2 = dyadic_ratio(2 * beta - 4).value;
  // bracket term 2 is -chi^2 r2 kappa^-4 for the Gaussian (Phi''(0) = -1)
  const double chi = std::sqrt(0.05 * std::pow(kappa, 4) * r0 / r2);
  const CorrelationLaw law{CorrelationShape::gaussian, chi, 0.0};
  const auto series = band_correction_series(kappa, law, source, U, beta, 2);
  const double ratio = series.bracket[2] / series.bracket[0];
  o.info(f("chi=%.6f, n=2 term / leading = %.6f", chi, ratio));

  const auto band = dyadic_band(kappa, 8);
  const double inf = std::numeric_limits<double>::infinity();
  const double quad = quadrature_band_expectation(band, law, source, U, beta, inf);
  const double stat = quadrature_band_expectation(band, CorrelationLaw{}, source, U, beta, inf);
  const double deviation = (quad - stat) / stat;
  o.check(deviation * ratio > 0.0, f("relative deviation %.5f has the sign of the n=2 term %.5f", deviation, ratio));
  o.check(std::abs(deviation - ratio) <= 0.5 * std::abs(ratio),
          f("|deviation - predicted| = %.5f <= 0.5 |predicted| = %.5f", std::abs(deviation - ratio),
            0.5 * std::abs(ratio)));
  o.summary = "quadrature band mean vs static baseline at kappa=4";
  return o;
}

// Criterion 9: appendix lattice-sum error shape.
Outcome criterion9() {
  Outcome o;
  const std::vector<double> ladder{8, 16, 32, 64};
  for (double beta : {-3.0, -2.5})
    for (WaveVector j : {WaveVector{1, 0}, WaveVector{1, 1}, WaveVector{2, 1}}) {
      std::vector<double> narrow, cell;
      std::string row;
      for (double kappa : ladder) {
        const auto a = verify_appendix_bound(j, kappa, beta);
        narrow.push_back(a.error / a.bound_shape);
        cell.push_back(a.error / a.cell_bound_shape);
        row += f(" %.3g", narrow.back());
      }
      const double spread = *std::max_element(narrow.begin(), narrow.end()) /
                            *std::min_element(narrow.begin(), narrow.end());
      const double slope = fit_scaling_exponent(ladder, narrow).slope;
      o.check(spread <= 10.0 && slope <= 0.2,
              f("beta=%g j=(%d,%d) error/(|j|^2 k^{2b+1}):%s  max/min=%.2f slope=%.3f", beta, j.x, j.y, row.c_str(),
                spread, slope));
      o.info(f("beta=%g j=(%d,%d) error/(|j|^2 k^{2b+3}) slope=%.3f", beta, j.x, j.y,
               fit_scaling_exponent(ladder, cell).slope));
    }
  o.summary = "lattice-sum minus annulus integral, normalised by |j|^2 kappa^{2 beta+1}";
  return o;
}

// Criterion 10: angular quartic identity and the G1 functional.
Outcome criterion10() {
  Outcome o;
  std::uint64_t h = rng::key(kSeed, 10);
  auto draw = [&] {
    h = rng::splitmix64(h);
    return static_cast<int>(h % 13) - 6;
  };
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    WaveVector j{}, n{};
    do j = {draw(), draw()}; while (j.is_zero());
    do n = {draw(), draw()}; while (n.is_zero());
    const double closed = angular_quartic_closed_form(j, n);
    worst = std::max(worst, std::abs(detail::angular_quartic_quadrature(j, n) - closed) / closed);
  }
  o.check(worst <= 1e-10, f("50 random (j, n): worst relative error %.3e", worst));

  const SourceSpec source{};
  double g1 = 0.0;
  for (const auto& i : source.support())
    for (const auto& j : source.support())
      g1 += 4.0 / std::numbers::pi * detail::angular_quartic_quadrature(i, j);
  const double closed = source_functionals(source).G1;
  o.check(std::abs(g1 - closed) / closed <= 1e-10, f("G1 quadrature %.10e vs closed form %.10e", g1, closed));
  o.summary = "angular quartic integral and G1";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10};
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > int(criteria.size())) {
    std::fprintf(stderr, "criterion must be in 1..%zu\n", criteria.size());
    return 2;
  }

  bool all = true;
  for (std::size_t n = 1; n <= criteria.size(); ++n) {
    if (only != 0 && int(n) != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("C%zu %s  %s  [%.1fs]\n", n, o.pass ? "PASS" : "FAIL", o.summary.c_str(), secs);
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
