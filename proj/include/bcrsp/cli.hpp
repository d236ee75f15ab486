#pragma once

// Batch front-end. Each command reads a parsed config, writes CSV or JSON to
// the given stream, and returns a process exit code.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bcrsp/noise.hpp"
#include "bcrsp/protocol.hpp"

namespace bcrsp::cli {

enum class Format { Csv, Json };

/// "csv" or "json"; throws ConfigError otherwise.
Format parse_format(std::string_view s);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct NoiseConfig {
  noise::NoiseKind kind = noise::NoiseKind::QuditFlip;
  std::optional<double> gamma;
};

struct RunConfig {
  std::size_t dimension = 0;
  std::vector<double> alice_phases;
  std::vector<double> bob_phases;
  std::optional<NoiseConfig> noise;
  noise::OutcomePolicy policy = noise::OutcomePolicy::Averaged;
  std::optional<OutcomeTuple> forced_outcome;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::vector<double> gammas;  // sweep grid; default 0, 0.1, ..., 1
  bool charlie_consents = true;

  PhaseVector alice() const { return PhaseVector(alice_phases); }
  PhaseVector bob() const { return PhaseVector(bob_phases); }
};

/// Radians as a number, or a string such as "pi", "-pi/2", "2pi/3",
/// "3*pi/4" or "0.25". Throws ConfigError on anything else.
double parse_phase(std::string_view text);

/// Parses and validates a JSON config document. Recognized keys:
/// dimension, alice_phases, bob_phases, noise {kind, gamma}, outcome_policy
/// ("averaged" | "conditioned"), forced_outcome [l, n, m, k], seed, trials,
/// gammas, charlie_consents. Missing phase lists default to zeros.
RunConfig parse_config(std::string_view json);

int cmd_run(const RunConfig& config, Format format, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, Format format, std::ostream& out, std::ostream& err);
int cmd_table(std::size_t dim, Format format, std::ostream& out, std::ostream& err);
/// `source` is a builtin ("charlie4", "identity<N>", "fourier<N>") or the
/// path of a JSON matrix: rows of numbers or of [re, im] pairs.
int cmd_decompose(std::string_view source, std::ostream& out, std::ostream& err);
int cmd_verify(std::uint64_t seed, Format format, std::ostream& out, std::ostream& err);

/// Fixed-point rendering used by every CSV column, "%.12f".
std::string format_real(double v);

}  // namespace bcrsp::cli
