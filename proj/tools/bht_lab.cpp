#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bht/bht.hpp"

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string columns_help() {
  using namespace bht::columns;
  return "Output files (CSV, RFC 4180, floats with 17 significant digits):\n"
         "  predict:  predictions.csv  " + join(predictions) + "\n"
         "  ensemble: stats.csv        " + join(stats) + "\n"
         "            samples.csv      " + join(samples) + "\n"
         "            fit.csv          " + join(fits) + "\n"
         "            plot.gp (gnuplot), manifest.json\n"
         "  verify:   checks.csv       " + join(checks) + "\n"
         "            appendix.csv     " + join(appendix) + "\n"
         "            verdict.json, manifest.json\n"
         "In timedep mode stats.csv 'expected' is the static lattice expectation and\n"
         "'lattice_expected' the quadrature expectation at t_end.\n"
         "Exit codes: 0 success, 1 error, 2 a check failed.\n"
         "Threads: --threads, else BHT_LAB_THREADS, else [ensemble] threads, else 1.\n";
}

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "config file (INI sections velocity, source, correlation, ensemble, solver, bands)")
      ->required();
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "master seed, overrides [ensemble] seed");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

int resolve_threads(const CLI::App* app, const Common& c, const bht::LabConfig& cfg) {
  if (app->count("--threads") > 0) return c.threads;
  if (const char* env = std::getenv("BHT_LAB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw bht::Error(bht::ErrorKind::invalid_argument, std::string("BHT_LAB_THREADS='") + env + "' is not a positive integer");
  }
  return cfg.threads > 0 ? cfg.threads : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bht_lab: random-phase tracer spectra, predictions, ensembles and checks"};
  app.footer(columns_help());
  app.require_subcommand(1);

  Common predict_opt, ensemble_opt, verify_opt;
  auto* predict = app.add_subcommand("predict", "evaluate the band predictions over the kappa ladder");
  auto* ensemble = app.add_subcommand("ensemble", "run the Monte Carlo ensemble and compare with predictions");
  auto* verify = app.add_subcommand("verify", "run the deterministic checks");
  add_common(predict, predict_opt);
  add_common(ensemble, ensemble_opt);
  add_common(verify, verify_opt);
  for (auto* sub : {predict, ensemble, verify}) sub->footer(columns_help());

  CLI11_PARSE(app, argc, argv);

  auto run = [&](CLI::App* sub, const Common& c, auto command) {
    const bht::LabConfig cfg = bht::load_config(c.config);
    bht::CommandOptions opt;
    opt.out_dir = c.out;
    if (sub->count("--seed") > 0) opt.seed = c.seed;
    opt.threads = resolve_threads(sub, c, cfg);
    opt.log = &std::cerr;
    return command(cfg, opt);
  };

  try {
    if (*predict) return run(predict, predict_opt, bht::cmd_predict);
    if (*ensemble) return run(ensemble, ensemble_opt, bht::cmd_ensemble);
    if (*verify) return run(verify, verify_opt, bht::cmd_verify);
  } catch (const bht::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bht::exit_code::error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bht::exit_code::error;
  }
  return bht::exit_code::error;
}
