#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bht/advection.hpp"
#include "bht/config.hpp"
#include "bht/ensemble.hpp"
#include "bht/fields.hpp"
#include "bht/output.hpp"
#include "bht/predictor.hpp"
#include "bht/rng.hpp"
#include "bht/static_solver.hpp"
#include "bht/timedep.hpp"

namespace bht {

struct CommandOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::ostream* log = nullptr;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int error = 1;
inline constexpr int check_failed = 2;
}  // namespace exit_code

namespace columns {
inline const std::vector<std::string> predictions{
    "kappa", "expected_vartheta", "var_bound", "lattice_vartheta", "expected_phi1", "var_bound_phi1",
    "series_vartheta", "modes", "below_validity", "degenerate"};
inline const std::vector<std::string> stats{
    "kappa", "n", "modes", "sample_mean", "sample_variance", "std_error", "expected", "lattice_expected",
    "var_bound", "rel_error", "z_closed", "z_lattice", "within_3se", "within_3se_lattice", "variance_ok",
    "density_mean", "per_mode_mean", "lag1_autocorr"};
inline const std::vector<std::string> samples{"sample", "kappa", "band_power"};
inline const std::vector<std::string> fits{"convention", "slope", "stderr", "expected_slope"};
inline const std::vector<std::string> checks{"check", "measured", "threshold", "margin", "gated", "pass"};
inline const std::vector<std::string> appendix{
    "beta", "j_x", "j_y", "kappa", "lattice_sum", "integral", "error", "error_over_bound", "error_over_cell_bound"};
}  // namespace columns

namespace detail {

inline LabConfig with_overrides(LabConfig cfg, const CommandOptions& opt) {
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.threads = std::max(1, opt.threads);
  return cfg;
}

struct OutputSet {
  std::filesystem::path dir;
  std::vector<std::string> files;

  explicit OutputSet(std::filesystem::path d) : dir(std::move(d)) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
  }
  void write(const std::string& name, std::string_view content) {
    atomic_write(dir / name, content);
    files.push_back(name);
  }
};

inline void note(const CommandOptions& opt, const std::string& msg) {
  if (opt.log) *opt.log << msg << "\n";
}

inline RunManifest start_manifest(const std::string& command, const LabConfig& cfg) {
  RunManifest m;
  m.command = command;
  m.config_snapshot = serialize_config(cfg);
  m.seed = cfg.seed;
  m.threads = cfg.threads;
  m.started = std::chrono::system_clock::now();
  return m;
}

inline void finish_manifest(RunManifest& m, OutputSet& out) {
  m.finished = std::chrono::system_clock::now();
  m.files = out.files;
  m.files.push_back("manifest.json");
  out.write("manifest.json", m.to_json().dump(2) + "\n");
}

inline nlohmann::json smallness_json(const SmallnessReport& s) {
  return {{"sup_norm_u", s.sup_norm_u},       {"alpha", s.alpha},
          {"sup_gate", s.sup_gate},           {"c4_lattice", s.c4_lattice},
          {"c4_gate", s.c4_gate},             {"c4_analytic", s.c4_analytic},
          {"analytic_gate", s.analytic_gate}, {"split_bound_ratio", s.split_bound_ratio},
          {"sum_gamma_lattice", s.sum_gamma_lattice}, {"sum_gamma_estimate", s.sum_gamma_estimate}};
}

}  // namespace detail

/// Evaluates the band predictions over the κ ladder into predictions.csv.
inline int cmd_predict(const LabConfig& input, const CommandOptions& opt) {
  const LabConfig cfg = detail::with_overrides(input, opt);
  cfg.velocity.validate();
  cfg.source.validate();
  cfg.law.validate();
  auto manifest = detail::start_manifest("predict", cfg);
  detail::OutputSet out(opt.out_dir);

  const double U = cfg.velocity.U, beta = cfg.velocity.beta;
  CsvTable table(columns::predictions);
  for (double kappa : cfg.kappas) {
    const auto band = dyadic_band(kappa, cfg.velocity.k_max);
    const auto e = expected_band_power(kappa, cfg.source, U, beta, Target::vartheta);
    const auto e1 = expected_band_power(kappa, cfg.source, U, beta, Target::phi1);
    const auto v = variance_band_bound(kappa, cfg.source, U, beta, Target::vartheta);
    const auto v1 = variance_band_bound(kappa, cfg.source, U, beta, Target::phi1);
    const auto series = band_correction_series(kappa, cfg.law, cfg.source, U, beta, cfg.series_terms);
    bool degenerate = e.degenerate_denominator || v.degenerate_denominator;
    for (bool d : series.degenerate) degenerate = degenerate || d;
    table.row() << kappa << e.value << v.value
                << lattice_band_expectation(band, cfg.source, U, beta, Target::vartheta) << e1.value << v1.value
                << series.value << band.members.size() << e.below_validity << degenerate;
  }
  out.write("predictions.csv", table.str());

  const auto small = smallness_diagnostics(cfg.velocity, cfg.source);
  const auto f = source_functionals(cfg.source);
  manifest.summary = {{"G0", f.G0}, {"G1", f.G1}, {"grad_inv_sup", f.grad_inv_sup},
                      {"smallness", detail::smallness_json(small)}};
  manifest.verdict = "pass";
  detail::finish_manifest(manifest, out);
  detail::note(opt, "wrote " + (out.dir / "predictions.csv").string());
  return exit_code::ok;
}

inline std::string plot_script(const EnsembleResult& r) {
  std::string s;
  s += "# gnuplot: log-log band power against kappa with predictions\n";
  s += "set datafile separator ','\n";
  s += "set logscale xy\n";
  s += "set xlabel 'kappa'\n";
  s += "set ylabel 'band power of the first-order tracer term'\n";
  s += "set key top right\n";
  if (r.report.band_fit) {
    s += "fit_slope = " + format_double(r.report.band_fit->slope) + "\n";
    s += "set title sprintf('fitted slope %.3f, expected %.3f', fit_slope, " +
         format_double(r.report.expected_band_slope) + ")\n";
  }
  s += "plot 'stats.csv' every ::1 using 1:4:6 with yerrorbars title 'sample mean', \\\n";
  s += "     '' every ::1 using 1:7 with linespoints title 'prediction', \\\n";
  s += "     '' every ::1 using 1:8 with linespoints title 'lattice expectation'\n";
  return s;
}

/// Runs the configured ensemble and writes stats.csv, samples.csv, fit.csv,
/// plot.gp and manifest.json. Returns check_failed when a band mean misses
/// its exact expectation by more than 3 standard errors.
inline int cmd_ensemble(const LabConfig& input, const CommandOptions& opt) {
  const LabConfig cfg = detail::with_overrides(input, opt);
  const EnsembleConfig ec = cfg.ensemble();
  auto manifest = detail::start_manifest("ensemble", cfg);
  detail::note(opt, "running " + std::string(to_string(ec.mode)) + " ensemble, n = " +
                        std::to_string(ec.n_samples) + ", threads = " + std::to_string(ec.threads));
  const EnsembleResult r = run_ensemble(ec);
  detail::OutputSet out(opt.out_dir);

  CsvTable stats(columns::stats);
  for (std::size_t b = 0; b < r.stats.size(); ++b) {
    const auto& s = r.stats[b];
    const auto& c = r.report.bands[b];
    stats.row() << s.kappa << s.n << s.modes << s.sample_mean << s.sample_variance << s.std_error << c.expected
                << c.lattice_expected << c.var_bound << c.rel_error << c.z_closed << c.z_lattice << c.within_3se
                << c.within_3se_lattice << c.variance_ok << s.sample_mean / s.kappa
                << s.sample_mean / double(s.modes) << (s.n >= 3 ? lag1_autocorrelation(s.values) : 0.0);
  }
  out.write("stats.csv", stats.str());

  CsvTable samples(columns::samples);
  for (int i = 0; i < ec.n_samples; ++i)
    for (const auto& s : r.stats) samples.row() << i << s.kappa << s.values[i];
  out.write("samples.csv", samples.str());

  CsvTable fits(columns::fits);
  const double beta = cfg.velocity.beta;
  auto fit_row = [&](const char* name, const std::optional<ScalingFit>& f, double expected) {
    if (f) fits.row() << name << f->slope << f->stderr_ << expected;
  };
  fit_row("band_power", r.report.band_fit, 2.0 * beta);
  fit_row("density", r.report.density_fit, 2.0 * beta - 1.0);
  fit_row("per_mode", r.report.per_mode_fit, 2.0 * beta - 2.0);
  fit_row("relative_fluctuation", r.report.fluctuation_fit, -1.0);
  out.write("fit.csv", fits.str());
  out.write("plot.gp", plot_script(r));

  const bool pass = r.report.all_within_3se_lattice() && r.envelope_violations == 0;
  manifest.verdict = pass ? "pass" : "fail";
  manifest.summary = {{"mode", std::string(to_string(ec.mode))},
                      {"n_samples", ec.n_samples},
                      {"envelope_violations", r.envelope_violations},
                      {"envelope_max_ratio", r.envelope_max_ratio},
                      {"max_increment_ratio", r.max_increment_ratio},
                      {"all_within_3se_lattice", r.report.all_within_3se_lattice()}};
  if (ec.mode == EnsembleMode::timedep) manifest.summary["t_end"] = ec.horizon();
  detail::finish_manifest(manifest, out);
  detail::note(opt, "verdict: " + manifest.verdict);
  return pass ? exit_code::ok : exit_code::check_failed;
}

struct CheckRow {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool gated = true;
  bool pass = false;
};

namespace detail {

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double angular_quartic_quadrature(WaveVector j, WaveVector n) {
  auto f = [&](double w) {
    const double a = j.x * std::sin(w) - j.y * std::cos(w);
    const double b = n.x * std::sin(w) - n.y * std::cos(w);
    return a * a * b * b;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2.0 * std::numbers::pi, 10, 1e-15);
}

inline CheckRow upper_check(std::string name, double measured, double threshold, bool gated = true) {
  return {std::move(name), measured, threshold, gated, measured <= threshold};
}

}  // namespace detail

/// Deterministic checks: static kernel identity, angular identity and the G1
/// quadrature, appendix lattice-sum shape, FFT vs direct convolution, iterative
/// vs dense solve, and the series remainder identity.
inline std::vector<CheckRow> run_verify_checks(const LabConfig& cfg, CsvTable* appendix = nullptr) {
  std::vector<CheckRow> rows;
  const CorrelationLaw frozen{};

  {
    double worst = 0.0, worst2 = 0.0;
    for (double a : {1.0, 4.0, 25.0})
      for (double t : {0.1, 1.0, 10.0}) {
        const double exact = std::pow(-std::expm1(-t * a), 2) / (a * a);
        worst = std::max(worst, detail::rel_diff(damped_correlation_integral(a, frozen, 1.0, t), exact));
        worst2 = std::max(worst2, detail::rel_diff(damped_correlation_integral_2d(a, frozen, 1.0, t), exact));
      }
    rows.push_back(detail::upper_check("static_kernel_identity", worst, 1e-10));
    rows.push_back(detail::upper_check("static_kernel_identity_2d", worst2, 1e-10));
  }

  {
    std::uint64_t h = rng::key(cfg.seed, 101);
    auto draw = [&] {
      h = rng::splitmix64(h);
      return static_cast<int>(h % 11) - 5;
    };
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      WaveVector j{}, n{};
      do j = {draw(), draw()}; while (j.is_zero());
      do n = {draw(), draw()}; while (n.is_zero());
      worst = std::max(worst, detail::rel_diff(detail::angular_quartic_quadrature(j, n),
                                               angular_quartic_closed_form(j, n)));
    }
    rows.push_back(detail::upper_check("angular_identity", worst, 1e-10));

    const auto support = cfg.source.support();
    double g1 = 0.0;
    for (const auto& i : support)
      for (const auto& j : support) {
        const double gi = cfg.source.gamma(i), gj = cfg.source.gamma(j);
        g1 += 4.0 / std::numbers::pi * detail::angular_quartic_quadrature(i, j) * gi * gi * gj * gj;
      }
    rows.push_back(detail::upper_check("g1_quadrature", detail::rel_diff(g1, source_functionals(cfg.source).G1), 1e-10));
  }

  for (double beta : {-3.0, -2.5}) {
    for (WaveVector j : {WaveVector{1, 0}, WaveVector{1, 1}, WaveVector{2, 1}}) {
      std::vector<double> kap, narrow, cell;
      for (double kappa : {8.0, 16.0, 32.0, 64.0}) {
        const auto row = verify_appendix_bound(j, kappa, beta);
        kap.push_back(kappa);
        narrow.push_back(row.error / row.bound_shape);
        cell.push_back(row.error / row.cell_bound_shape);
        if (appendix)
          appendix->row() << beta << j.x << j.y << kappa << row.lattice_sum << row.integral << row.error
                          << narrow.back() << cell.back();
      }
      const std::string tag = "appendix_b" + format_double(beta) + "_j" + std::to_string(j.x) + std::to_string(j.y);
      auto spread = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
      };
      rows.push_back(detail::upper_check(tag + "_cell_spread", spread(cell), 10.0));
      rows.push_back(detail::upper_check(tag + "_cell_slope", fit_scaling_exponent(kap, cell).slope, 0.2));
      rows.push_back(detail::upper_check(tag + "_spread", spread(narrow), 10.0, false));
      rows.push_back(detail::upper_check(tag + "_slope", fit_scaling_exponent(kap, narrow).slope, 0.2, false));
    }
  }

  {
    const int K = std::max(cfg.source.min_k_max(), std::min(cfg.velocity.k_max, 12));
    VelocitySpec vel = cfg.velocity;
    vel.k_max = K;
    const auto u = build_velocity(vel, sample_static_phases(rng::derive(cfg.seed, 0, 7), K));
    const auto g = build_source(cfg.source, sample_static_phases(rng::derive(cfg.seed, 0, 8), K));
    const SpectralField theta = base_solution(g) + first_order_term(u, g);
    const auto fast = convolve_advection(u, theta);
    const auto slow = direct_convolve_advection(u, theta);
    rows.push_back(detail::upper_check("fft_vs_direct", l2_norm(fast - slow) / l2_norm(slow), 1e-12));
  }

  {
    const int K = std::max(cfg.source.min_k_max(), std::min(cfg.velocity.k_max, 16));
    VelocitySpec vel = cfg.velocity;
    vel.k_max = K;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto u = build_velocity(vel, sample_static_phases(rng::derive(cfg.seed, s, 9), K));
      const auto g = build_source(cfg.source, sample_static_phases(rng::derive(cfg.seed, s, 10), K));
      const auto it = iterate_static(u, g, cfg.solver);
      const auto dense = dense_oracle_solve(u, g);
      worst = std::max(worst, l2_norm(it.theta - dense) / l2_norm(dense));
    }
    rows.push_back(detail::upper_check("iterative_vs_dense", worst, 1e-10));
  }

  if (cfg.law.shape != CorrelationShape::constant_one) {
    const WaveVector k{0, 10};
    const auto series = mode_power_series(k, cfg.law, cfg.source, cfg.velocity.U, cfg.velocity.beta, cfg.series_terms);
    const auto quad = mode_power_quadrature(k, cfg.law, cfg.source, cfg.velocity.U, cfg.velocity.beta,
                                            std::numeric_limits<double>::infinity());
    rows.push_back(detail::upper_check("series_remainder_identity",
                                       detail::rel_diff(series.estimate.value + series.remainder, quad.value),
                                       1e-10));
  }
  return rows;
}

/// Writes checks.csv, appendix.csv, verdict.json and manifest.json; exit code
/// is check_failed unless every gated check passes.
inline int cmd_verify(const LabConfig& input, const CommandOptions& opt) {
  const LabConfig cfg = detail::with_overrides(input, opt);
  cfg.velocity.validate();
  cfg.source.validate();
  cfg.law.validate();
  auto manifest = detail::start_manifest("verify", cfg);
  CsvTable appendix(columns::appendix);
  const auto rows = run_verify_checks(cfg, &appendix);
  detail::OutputSet out(opt.out_dir);

  CsvTable checks(columns::checks);
  bool pass = true;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : rows) {
    checks.row() << r.name << r.measured << r.threshold << r.threshold - r.measured << r.gated << r.pass;
    if (r.gated) pass = pass && r.pass;
    list.push_back({{"check", r.name},
                    {"measured", r.measured},
                    {"threshold", r.threshold},
                    {"gated", r.gated},
                    {"pass", r.pass}});
    detail::note(opt, std::string(r.pass ? "PASS " : (r.gated ? "FAIL " : "INFO ")) + r.name + " " +
                          format_double(r.measured) + " <= " + format_double(r.threshold));
  }
  out.write("checks.csv", checks.str());
  out.write("appendix.csv", appendix.str());
  manifest.verdict = pass ? "pass" : "fail";
  out.write("verdict.json", nlohmann::json{{"verdict", manifest.verdict}, {"checks", list}}.dump(2) + "\n");
  manifest.summary = {{"checks", rows.size()}};
  detail::finish_manifest(manifest, out);
  return pass ? exit_code::ok : exit_code::check_failed;
}

}  // namespace bht
