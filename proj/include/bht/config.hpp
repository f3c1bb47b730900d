#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bht/ensemble.hpp"
#include "bht/error.hpp"
#include "bht/fields.hpp"
#include "bht/phases.hpp"
#include "bht/static_solver.hpp"
#include "bht/timedep.hpp"

namespace bht {

/// Everything a run needs, as read from an INI-style file with sections
/// [velocity] [source] [correlation] [ensemble] [solver] [bands].
struct LabConfig {
  VelocitySpec velocity;
  SourceSpec source;
  CorrelationLaw law;

  int n_samples = 400;
  std::uint64_t seed = 1;
  EnsembleMode mode = EnsembleMode::static_phases;
  int threads = 0;  ///< 0: not set in the file
  bool freeze_xi = false;
  bool identical_seeds = false;
  bool full_theta = false;
  double variance_slack = 2.0;

  StaticSolverOptions solver;
  double dt = 0.0;  ///< 0: 1 / (2 K_max^2)
  double t_end = 0.0;
  int order = 1;
  int points_per_scale = 20;
  int series_terms = 2;

  std::vector<double> kappas{8, 16, 32};

  friend bool operator==(const LabConfig&, const LabConfig&) = default;

  EnsembleConfig ensemble() const {
    EnsembleConfig e;
    e.n_samples = n_samples;
    e.master_seed = seed;
    e.velocity = velocity;
    e.source = source;
    e.law = law;
    e.kappas = kappas;
    e.mode = mode;
    e.freeze_xi = freeze_xi;
    e.identical_seeds = identical_seeds;
    e.full_theta = full_theta;
    e.threads = threads > 0 ? threads : 1;
    e.variance_slack = variance_slack;
    e.solver = solver;
    e.t_end = t_end;
    e.points_per_scale = points_per_scale;
    return e;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] inline void parse_fail(int line, const std::string& msg) {
  throw Error(ErrorKind::config_parse, "line " + std::to_string(line) + ": " + msg);
}

inline double to_double(const std::string& v, int line, const std::string& key) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) parse_fail(line, "key '" + key + "': '" + v + "' is not a number");
  return out;
}

template <class Int>
Int to_int(const std::string& v, int line, const std::string& key) {
  Int out{};
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) parse_fail(line, "key '" + key + "': '" + v + "' is not an integer");
  return out;
}

inline bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  parse_fail(line, "key '" + key + "': '" + v + "' is not a boolean");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace detail

/// Parses the text of a config file. Errors carry the line number and name
/// the offending key or section.
inline LabConfig parse_config(std::string_view text) {
  using namespace detail;
  LabConfig c;
  std::string section;
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto hash = s.find_first_of("#;"); hash != std::string::npos) s.resize(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') parse_fail(line, "malformed section header '" + s + "'");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      static const char* known[] = {"velocity", "source", "correlation", "ensemble", "solver", "bands"};
      if (std::find(std::begin(known), std::end(known), section) == std::end(known))
        parse_fail(line, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) parse_fail(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string val = trim(std::string_view(s).substr(eq + 1));
    if (section.empty()) parse_fail(line, "key '" + key + "' outside of any section");
    if (key.empty()) parse_fail(line, "empty key");
    const std::string full = section + "." + key;
    if (auto [it, fresh] = seen.emplace(full, line); !fresh)
      parse_fail(line, "duplicate key '" + key + "' in [" + section + "] (first on line " +
                           std::to_string(it->second) + ")");

    auto unknown = [&] { parse_fail(line, "unknown key '" + key + "' in [" + section + "]"); };
    try {
      if (section == "velocity") {
        if (key == "U") c.velocity.U = to_double(val, line, key);
        else if (key == "beta") c.velocity.beta = to_double(val, line, key);
        else if (key == "K_max") c.velocity.k_max = to_int<int>(val, line, key);
        else unknown();
      } else if (section == "source") {
        if (key == "kappa_g") c.source.kappa_g = to_double(val, line, key);
        else if (key == "gamma") {
          c.source.gamma_table.clear();
          for (const auto& item : split(val, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) parse_fail(line, "key 'gamma': expected r2:value, got '" + item + "'");
            const long r2 = to_int<long>(trim(item.substr(0, colon)), line, key);
            c.source.gamma_table[r2] = to_double(trim(item.substr(colon + 1)), line, key);
          }
        } else unknown();
      } else if (section == "correlation") {
        if (key == "shape") c.law.shape = parse_correlation_shape(val);
        else if (key == "chi") c.law.chi = to_double(val, line, key);
        else if (key == "eta") c.law.eta = to_double(val, line, key);
        else if (key == "series_terms") c.series_terms = to_int<int>(val, line, key);
        else unknown();
      } else if (section == "ensemble") {
        if (key == "n_samples") c.n_samples = to_int<int>(val, line, key);
        else if (key == "seed") c.seed = to_int<std::uint64_t>(val, line, key);
        else if (key == "mode") c.mode = parse_ensemble_mode(val);
        else if (key == "threads") c.threads = to_int<int>(val, line, key);
        else if (key == "freeze_xi") c.freeze_xi = to_bool(val, line, key);
        else if (key == "identical_seeds") c.identical_seeds = to_bool(val, line, key);
        else if (key == "full_theta") c.full_theta = to_bool(val, line, key);
        else if (key == "variance_slack") c.variance_slack = to_double(val, line, key);
        else unknown();
      } else if (section == "solver") {
        if (key == "tol") c.solver.tol = to_double(val, line, key);
        else if (key == "max_iter") c.solver.max_iter = to_int<int>(val, line, key);
        else if (key == "gate_ratio") c.solver.gate_ratio = to_double(val, line, key);
        else if (key == "gate_steps") c.solver.gate_steps = to_int<int>(val, line, key);
        else if (key == "dt") c.dt = to_double(val, line, key);
        else if (key == "t_end") c.t_end = to_double(val, line, key);
        else if (key == "order") c.order = to_int<int>(val, line, key);
        else if (key == "points_per_scale") c.points_per_scale = to_int<int>(val, line, key);
        else unknown();
      } else if (section == "bands") {
        if (key == "kappas") {
          c.kappas.clear();
          for (const auto& item : split(val, ',')) c.kappas.push_back(to_double(item, line, key));
          if (c.kappas.empty()) parse_fail(line, "key 'kappas': empty list");
        } else unknown();
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config_parse) throw;
      parse_fail(line, "key '" + key + "': " + e.what());
    }
  }
  return c;
}

inline LabConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Writes every key; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const LabConfig& c) {
  using detail::fmt17;
  std::ostringstream o;
  o << "[velocity]\n"
    << "U = " << fmt17(c.velocity.U) << "\n"
    << "beta = " << fmt17(c.velocity.beta) << "\n"
    << "K_max = " << c.velocity.k_max << "\n\n";
  o << "[source]\n"
    << "kappa_g = " << fmt17(c.source.kappa_g) << "\n";
  if (!c.source.gamma_table.empty()) {
    o << "gamma = ";
    bool first = true;
    for (const auto& [r2, g] : c.source.gamma_table) {
      o << (first ? "" : ", ") << r2 << ":" << fmt17(g);
      first = false;
    }
    o << "\n";
  }
  o << "\n[correlation]\n"
    << "shape = " << to_string(c.law.shape) << "\n"
    << "chi = " << fmt17(c.law.chi) << "\n"
    << "eta = " << fmt17(c.law.eta) << "\n"
    << "series_terms = " << c.series_terms << "\n\n";
  o << "[ensemble]\n"
    << "n_samples = " << c.n_samples << "\n"
    << "seed = " << c.seed << "\n"
    << "mode = " << to_string(c.mode) << "\n";
  if (c.threads > 0) o << "threads = " << c.threads << "\n";
  o << "freeze_xi = " << (c.freeze_xi ? "true" : "false") << "\n"
    << "identical_seeds = " << (c.identical_seeds ? "true" : "false") << "\n"
    << "full_theta = " << (c.full_theta ? "true" : "false") << "\n"
    << "variance_slack = " << fmt17(c.variance_slack) << "\n\n";
  o << "[solver]\n"
    << "tol = " << fmt17(c.solver.tol) << "\n"
    << "max_iter = " << c.solver.max_iter << "\n"
    << "gate_ratio = " << fmt17(c.solver.gate_ratio) << "\n"
    << "gate_steps = " << c.solver.gate_steps << "\n"
    << "dt = " << fmt17(c.dt) << "\n"
    << "t_end = " << fmt17(c.t_end) << "\n"
    << "order = " << c.order << "\n"
    << "points_per_scale = " << c.points_per_scale << "\n\n";
  o << "[bands]\nkappas = ";
  for (std::size_t i = 0; i < c.kappas.size(); ++i) o << (i ? ", " : "") << fmt17(c.kappas[i]);
  o << "\n";
  return o.str();
}

}  // namespace bht
