#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bht {

enum class ErrorKind {
  invalid_argument,
  band_truncated,
  truncation_mismatch,
  no_sampler,
  divergent_iteration,
  singular_system,
  under_resolved,
  convergence_gate,
  unstable_step,
  divergent_picard,
  out_of_theory,
  nonpositive_mean,
  config_parse,
  sample_failure,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::band_truncated: return "band-truncated";
    case ErrorKind::truncation_mismatch: return "truncation-mismatch";
    case ErrorKind::no_sampler: return "no-sampler";
    case ErrorKind::divergent_iteration: return "divergent-iteration";
    case ErrorKind::singular_system: return "singular-system";
    case ErrorKind::under_resolved: return "under-resolved";
    case ErrorKind::convergence_gate: return "convergence-gate";
    case ErrorKind::unstable_step: return "unstable-step";
    case ErrorKind::divergent_picard: return "divergent-picard";
    case ErrorKind::out_of_theory: return "out-of-theory";
    case ErrorKind::nonpositive_mean: return "nonpositive-mean";
    case ErrorKind::config_parse: return "config-parse";
    case ErrorKind::sample_failure: return "sample-failure";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Library-wide exception. The message is prefixed with the kebab-case kind
/// so callers that only see `what()` can still classify the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& detail) {
  if (!condition) throw Error(kind, detail);
}

}  // namespace bht
