#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bht/advection.hpp"
#include "bht/error.hpp"
#include "bht/fields.hpp"
#include "bht/lattice.hpp"
#include "bht/phases.hpp"
#include "bht/predictor.hpp"
#include "bht/rng.hpp"
#include "bht/static_solver.hpp"
#include "bht/timedep.hpp"

namespace bht {

enum class EnsembleMode { static_phases, timedep };

constexpr std::string_view to_string(EnsembleMode m) {
  return m == EnsembleMode::static_phases ? "static" : "timedep";
}

inline EnsembleMode parse_ensemble_mode(std::string_view s) {
  if (s == "static") return EnsembleMode::static_phases;
  if (s == "timedep") return EnsembleMode::timedep;
  throw Error(ErrorKind::invalid_argument, "unknown ensemble mode '" + std::string(s) + "'");
}

namespace roles {
inline constexpr std::uint64_t phases = 0;
inline constexpr std::uint64_t source = 1;
}  // namespace roles

struct EnsembleConfig {
  int n_samples = 400;
  std::uint64_t master_seed = 1;
  VelocitySpec velocity;
  SourceSpec source;
  CorrelationLaw law;
  std::vector<double> kappas{8, 16, 32};
  EnsembleMode mode = EnsembleMode::static_phases;
  bool freeze_xi = false;        ///< one ξ for every sample (conditional statistics)
  bool identical_seeds = false;  ///< every sample reuses sample 0's seeds
  bool full_theta = false;       ///< also solve for θ and record the iteration
  int threads = 1;
  double variance_slack = 2.0;
  StaticSolverOptions solver;
  double t_end = 0.0;  ///< timedep horizon; 0 picks 10 / κ_min^2
  int points_per_scale = 20;

  void validate() const {
    require(n_samples >= 2, ErrorKind::invalid_argument, "n_samples must be >= 2");
    require(threads >= 1, ErrorKind::invalid_argument, "threads must be >= 1");
    require(!kappas.empty(), ErrorKind::invalid_argument, "band ladder is empty");
    velocity.validate();
    source.validate();
    law.validate();
    require(velocity.k_max >= source.min_k_max(), ErrorKind::invalid_argument,
            "K_max does not hold the source support");
    for (double k : kappas) (void)dyadic_band(k, velocity.k_max);
    require(t_end >= 0.0 && points_per_scale >= 1, ErrorKind::invalid_argument, "invalid time settings");
    if (mode == EnsembleMode::timedep)
      require(law.has_sampler(), ErrorKind::no_sampler,
              "no path sampler for correlation shape '" + std::string(to_string(law.shape)) + "'");
  }

  double horizon() const {
    if (t_end > 0.0) return t_end;
    const double k0 = *std::min_element(kappas.begin(), kappas.end());
    return 10.0 / (k0 * k0);
  }

  std::uint64_t sample_seed(int index, std::uint64_t role) const {
    const int i = identical_seeds || (freeze_xi && role == roles::source) ? 0 : index;
    return rng::derive(master_seed, static_cast<std::uint64_t>(i), role);
  }
};

struct BandStatistics {
  double kappa = 0.0;
  int n = 0;
  std::size_t modes = 0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;  ///< unbiased
  double std_error = 0.0;
  std::vector<double> values;    ///< per-sample band power, by sample index
};

inline BandStatistics summarize(double kappa, std::size_t modes, std::vector<double> values) {
  require(values.size() >= 2, ErrorKind::invalid_argument, "need at least two samples");
  BandStatistics s;
  s.kappa = kappa;
  s.modes = modes;
  s.n = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.sample_mean = sum / s.n;
  double ss = 0.0;
  for (double v : values) ss += (v - s.sample_mean) * (v - s.sample_mean);
  s.sample_variance = ss / (s.n - 1);
  s.std_error = std::sqrt(s.sample_variance / s.n);
  s.values = std::move(values);
  return s;
}

/// Lag-1 sample autocorrelation in index order.
inline double lag1_autocorrelation(const std::vector<double>& v) {
  require(v.size() >= 3, ErrorKind::invalid_argument, "need at least three values");
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    den += (v[i] - mean) * (v[i] - mean);
    if (i + 1 < v.size()) num += (v[i] - mean) * (v[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

struct ScalingFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of log y against log κ.
inline ScalingFit fit_scaling_exponent(const std::vector<double>& kappas, const std::vector<double>& values) {
  require(kappas.size() == values.size(), ErrorKind::invalid_argument, "size mismatch");
  require(kappas.size() >= 3, ErrorKind::invalid_argument, "need at least three bands");
  const std::size_t n = kappas.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] > 0.0))
      throw Error(ErrorKind::nonpositive_mean, "non-positive value at kappa = " + std::to_string(kappas[i]));
    require(kappas[i] > 0.0, ErrorKind::invalid_argument, "kappa must be positive");
    x[i] = std::log(kappas[i]);
    y[i] = std::log(values[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorKind::invalid_argument, "kappas must not all coincide");
  ScalingFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.stderr_ = std::sqrt(rss / double(n - 2) / sxx);
  }
  return f;
}

inline ScalingFit fit_scaling_exponent(const std::vector<BandStatistics>& stats) {
  std::vector<double> k, m;
  for (const auto& s : stats) k.push_back(s.kappa), m.push_back(s.sample_mean);
  return fit_scaling_exponent(k, m);
}

struct BandComparison {
  double kappa = 0.0;
  double expected = 0.0;          ///< closed-form band law
  double lattice_expected = 0.0;  ///< exact lattice expectation of the estimator
  double var_bound = 0.0;
  double rel_error = 0.0;         ///< |mean - expected| / expected
  double z_closed = 0.0;          ///< (mean - expected) / std_error
  double z_lattice = 0.0;         ///< (mean - lattice_expected) / std_error
  bool within_3se = false;        ///< against the closed form
  bool within_3se_lattice = false;
  bool variance_ok = false;       ///< sample_variance <= slack * var_bound
  bool below_validity = false;
};

struct PredictionReport {
  std::vector<BandComparison> bands;
  std::optional<ScalingFit> band_fit;     ///< band power, expect 2β
  std::optional<ScalingFit> density_fit;  ///< band power / κ, expect 2β - 1
  std::optional<ScalingFit> per_mode_fit; ///< band power / mode count, expect 2β - 2
  std::optional<ScalingFit> fluctuation_fit;  ///< std / mean, expect -1
  double expected_band_slope = 0.0;

  bool all_within_3se_lattice() const {
    return std::all_of(bands.begin(), bands.end(), [](const auto& b) { return b.within_3se_lattice; });
  }
};

struct EnsembleResult {
  std::vector<BandStatistics> stats;
  PredictionReport report;
  long envelope_violations = 0;  ///< static mode: modes with |ϑ_k| above the envelope
  double envelope_max_ratio = 0.0;
  double max_increment_ratio = 0.0;  ///< full_theta only
  int max_iterations = 0;
};

namespace detail {

struct SampleRecord {
  std::vector<double> band_power;
  long violations = 0;
  double envelope_ratio = 0.0;
  double increment_ratio = 0.0;
  int iterations = 0;
};

/// Runs job(i, worker) for i in [0, n) on `threads` workers. Errors are
/// reported for the lowest failing index.
template <class Job>
void parallel_for(int n, int threads, Job job) {
  std::atomic<int> next{0};
  std::mutex error_mutex;
  int failed_index = n;
  std::string failed_message;
  auto worker = [&](int w) {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i, w);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (i < failed_index) failed_index = i, failed_message = e.what();
      }
    }
  };
  const int t = std::max(1, std::min(threads, n));
  if (t == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < t; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  if (failed_index < n)
    throw Error(ErrorKind::sample_failure, "sample " + std::to_string(failed_index) + ": " + failed_message);
}

inline std::vector<BandStatistics> collect(const EnsembleConfig& cfg, const std::vector<DyadicBand>& bands,
                                           const std::vector<SampleRecord>& records) {
  std::vector<BandStatistics> stats;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    std::vector<double> values;
    values.reserve(records.size());
    for (const auto& r : records) values.push_back(r.band_power[b]);
    stats.push_back(summarize(cfg.kappas[b], bands[b].members.size(), std::move(values)));
  }
  return stats;
}

inline void fill_fits(PredictionReport& rep, const std::vector<BandStatistics>& stats, double beta) {
  rep.expected_band_slope = 2.0 * beta;
  if (stats.size() < 3) return;
  std::vector<double> k, band, density, per_mode, fluct;
  for (const auto& s : stats) {
    k.push_back(s.kappa);
    band.push_back(s.sample_mean);
    density.push_back(s.sample_mean / s.kappa);
    per_mode.push_back(s.sample_mean / double(s.modes));
    fluct.push_back(std::sqrt(s.sample_variance) / s.sample_mean);
  }
  try {
    rep.band_fit = fit_scaling_exponent(k, band);
    rep.density_fit = fit_scaling_exponent(k, density);
    rep.per_mode_fit = fit_scaling_exponent(k, per_mode);
    rep.fluctuation_fit = fit_scaling_exponent(k, fluct);
  } catch (const Error&) {
    // left empty when a mean is not positive
  }
}

inline BandComparison compare(const BandStatistics& s, double expected, double lattice_expected,
                              double var_bound, double slack, bool below_validity) {
  BandComparison c;
  c.kappa = s.kappa;
  c.expected = expected;
  c.lattice_expected = lattice_expected;
  c.var_bound = var_bound;
  c.rel_error = std::abs(s.sample_mean - expected) / expected;
  const double se = s.std_error > 0.0 ? s.std_error : std::numeric_limits<double>::min();
  c.z_closed = (s.sample_mean - expected) / se;
  c.z_lattice = (s.sample_mean - lattice_expected) / se;
  c.within_3se = std::abs(s.sample_mean - expected) <= 3.0 * s.std_error;
  c.within_3se_lattice = std::abs(s.sample_mean - lattice_expected) <= 3.0 * s.std_error;
  c.variance_ok = s.sample_variance <= slack * var_bound;
  c.below_validity = below_validity;
  return c;
}

}  // namespace detail

/// Static-phase Monte Carlo over fresh φ and ξ per sample: band powers of ϑ
/// (and optionally the full solve), compared with the band law.
inline EnsembleResult run_static_ensemble(const EnsembleConfig& cfg) {
  cfg.validate();
  const auto smallness = smallness_diagnostics(cfg.velocity, cfg.source);
  if (!smallness.all_pass())
    throw Error(ErrorKind::convergence_gate, "smallness diagnostics fail for U = " + std::to_string(cfg.velocity.U));

  const int K = cfg.velocity.k_max;
  std::vector<DyadicBand> bands;
  for (double k : cfg.kappas) bands.push_back(dyadic_band(k, K));
  const auto lat = lattice_for(K);
  const auto functionals = source_functionals(cfg.source);
  std::vector<double> envelope(lat->size(), 0.0);
  for (const auto& k : lat->modes())
    envelope[lat->index(k)] =
        functionals.grad_inv_sup * cfg.velocity.U * gamma_envelope(k.norm(), cfg.velocity.beta, cfg.source.kappa_g);

  std::vector<detail::SampleRecord> records(cfg.n_samples);
  std::vector<std::unique_ptr<AdvectionOperator>> ops(std::max(1, cfg.threads));
  detail::parallel_for(cfg.n_samples, cfg.threads, [&](int i, int w) {
    const auto phases = sample_static_phases(cfg.sample_seed(i, roles::phases), K);
    const auto xi = sample_static_phases(cfg.sample_seed(i, roles::source), K);
    const VectorField u = build_velocity(cfg.velocity, phases);
    const SpectralField g = build_source(cfg.source, xi);
    const SpectralField vt = first_order_term(u, g);

    auto& rec = records[i];
    for (const auto& band : bands) rec.band_power.push_back(band_power(vt, band));
    for (const auto& k : lat->modes()) {
      const double r = std::abs(vt[k]) / envelope[lat->index(k)];
      rec.envelope_ratio = std::max(rec.envelope_ratio, r);
      if (r > 1.0 + 1e-12) ++rec.violations;
    }
    if (cfg.full_theta) {
      if (!ops[w]) ops[w] = std::make_unique<AdvectionOperator>(K);
      const auto res = iterate_static(u, g, cfg.solver, ops[w].get());
      const double floor = 1e3 * std::numeric_limits<double>::epsilon() * l2_norm(res.theta0);
      for (double q : res.increment_ratios(floor)) rec.increment_ratio = std::max(rec.increment_ratio, q);
      rec.iterations = res.iterations;
    }
  });

  EnsembleResult out;
  out.stats = detail::collect(cfg, bands, records);
  for (const auto& r : records) {
    out.envelope_violations += r.violations;
    out.envelope_max_ratio = std::max(out.envelope_max_ratio, r.envelope_ratio);
    out.max_increment_ratio = std::max(out.max_increment_ratio, r.increment_ratio);
    out.max_iterations = std::max(out.max_iterations, r.iterations);
  }
  const double U = cfg.velocity.U, beta = cfg.velocity.beta;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const auto e = expected_band_power(cfg.kappas[b], cfg.source, U, beta, Target::vartheta);
    const auto v = variance_band_bound(cfg.kappas[b], cfg.source, U, beta, Target::vartheta);
    const double lat_e = lattice_band_expectation(bands[b], cfg.source, U, beta, Target::vartheta);
    out.report.bands.push_back(detail::compare(out.stats[b], e.value, lat_e, v.value, cfg.variance_slack,
                                               e.below_validity));
  }
  detail::fill_fits(out.report, out.stats, beta);
  return out;
}

/// Σ_k U^2 Σ_j γ_j^2 (k∧j)^2 |k-j|^{2β} I(t; |k|^2, χ_{k-j}) over a band, the
/// exact expectation of the sampled band power of ϑ(t).
inline double quadrature_band_expectation(const DyadicBand& band, const CorrelationLaw& law,
                                          const SourceSpec& source, double U, double beta, double t) {
  std::map<std::pair<long, double>, double> cache;
  double sum = 0.0;
  for (const auto& k : band.members) {
    const double a = double(k.norm2());
    double mode = 0.0;
    for (const auto& j : source.support()) {
      const WaveVector p = k - j;
      if (p.is_zero()) continue;
      const double w = double(wedge(k, j));
      if (w == 0.0) continue;
      const double chi = law.chi_k(p);
      auto it = cache.find({k.norm2(), chi});
      if (it == cache.end())
        it = cache.emplace(std::pair{k.norm2(), chi}, damped_correlation_integral(a, law, chi, t)).first;
      const double gj = source.gamma(j);
      mode += gj * gj * w * w * std::pow(double(p.norm2()), beta) * it->second;
    }
    sum += mode;
  }
  return U * U * sum;
}

/// Time-dependent Monte Carlo: sampled phase paths, ϑ_k(t_end) per band mode,
/// compared with the per-mode quadrature and with the static expectation.
/// In the report `expected` holds the static band law, `lattice_expected` the
/// quadrature band expectation at t_end.
inline EnsembleResult run_timedep_ensemble(const EnsembleConfig& cfg) {
  cfg.validate();
  const auto smallness = smallness_diagnostics(cfg.velocity, cfg.source);
  if (!smallness.all_pass())
    throw Error(ErrorKind::convergence_gate, "smallness diagnostics fail for U = " + std::to_string(cfg.velocity.U));

  const int K = cfg.velocity.k_max;
  const double t = cfg.horizon();
  std::vector<DyadicBand> bands;
  for (double k : cfg.kappas) bands.push_back(dyadic_band(k, K));

  std::vector<detail::SampleRecord> records(cfg.n_samples);
  detail::parallel_for(cfg.n_samples, cfg.threads, [&](int i, int) {
    const PhaseProcess process(cfg.sample_seed(i, roles::phases), cfg.law);
    const auto xi = sample_static_phases(cfg.sample_seed(i, roles::source), K);
    const SpectralField g = build_source(cfg.source, xi);
    auto& rec = records[i];
    for (const auto& band : bands) {
      const auto vt = theta1_band(process, cfg.velocity, g, band, t, cfg.points_per_scale);
      double p = 0.0;
      for (const auto& c : vt) p += std::norm(c);
      rec.band_power.push_back(p);
    }
    if (cfg.full_theta) {
      auto tc = TimeSolveConfig::defaults(K, t);
      tc.output_stride = tc.steps();
      (void)evolve_full(process, cfg.velocity, g, tc);
    }
  });

  EnsembleResult out;
  out.stats = detail::collect(cfg, bands, records);
  const double U = cfg.velocity.U, beta = cfg.velocity.beta;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    const double static_e = lattice_band_expectation(bands[b], cfg.source, U, beta, Target::vartheta);
    const double quad_e = quadrature_band_expectation(bands[b], cfg.law, cfg.source, U, beta, t);
    const auto v = variance_band_bound(cfg.kappas[b], cfg.source, U, beta, Target::vartheta);
    out.report.bands.push_back(detail::compare(out.stats[b], static_e, quad_e, v.value, cfg.variance_slack,
                                               cfg.kappas[b] <= 2.0 * cfg.source.kappa_g));
  }
  detail::fill_fits(out.report, out.stats, beta);
  return out;
}

inline EnsembleResult run_ensemble(const EnsembleConfig& cfg) {
  return cfg.mode == EnsembleMode::static_phases ? run_static_ensemble(cfg) : run_timedep_ensemble(cfg);
}

}  // namespace bht
