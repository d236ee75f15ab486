#pragma once

// Bidirectional controlled remote preparation of equatorial quNit states over
// two shared three-party GHZ channels.
//
// Alice holds A1, A2; Bob holds B1, B2; Charlie holds C1, C2. Channel 1 links
// (A1, B1, C1), channel 2 links (A2, B2, C2). Alice measures A2, Bob measures
// B1, Charlie measures C1 and C2 in the Fourier basis; afterwards A1 carries
// Bob's state and B2 carries Alice's state up to a diagonal phase correction.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bcrsp/qudit.hpp"

namespace bcrsp {

/// Particle labels in the global register order.
enum class Particle : std::size_t { A1 = 0, B1 = 1, C1 = 2, A2 = 3, B2 = 4, C2 = 5 };

inline constexpr std::array<Particle, 6> kChannelOrder = {Particle::A1, Particle::B1, Particle::C1,
                                                         Particle::A2, Particle::B2, Particle::C2};

std::string_view to_string(Particle p);

/// a (+) b: addition modulo n.
std::size_t add_mod(std::size_t a, std::size_t b, std::size_t n);

/// The N-1 free phases of an equatorial state; the phase of |0> is fixed to 0.
class PhaseVector {
 public:
  /// Dimension is phases.size() + 1. Throws std::invalid_argument when empty
  /// or when a phase is not finite.
  explicit PhaseVector(std::vector<double> phases);
  static PhaseVector zero(std::size_t dim);

  std::size_t dim() const { return phases_.size() + 1; }
  const std::vector<double>& phases() const { return phases_; }
  /// Phase of |j>, with theta(0) == 0.
  double theta(std::size_t j) const { return j == 0 ? 0.0 : phases_.at(j - 1); }

 private:
  std::vector<double> phases_;
};

struct OutcomeTuple {
  std::size_t l = 0;  // Alice, A2
  std::size_t n = 0;  // Bob, B1
  std::size_t m = 0;  // Charlie, C1
  std::size_t k = 0;  // Charlie, C2

  bool valid_for(std::size_t dim) const { return l < dim && n < dim && m < dim && k < dim; }
  friend bool operator==(const OutcomeTuple&, const OutcomeTuple&) = default;
};

/// Index of the diagonal correction applied at A1 and at B2.
struct CorrectionRule {
  std::size_t a1_index = 0;  // m (+) n
  std::size_t b2_index = 0;  // k (+) l
  friend bool operator==(const CorrectionRule&, const CorrectionRule&) = default;
};

CorrectionRule correction_rule(const OutcomeTuple& t, std::size_t dim);

struct ProtocolResult {
  OutcomeTuple outcome;
  StateVector alice_precorrection;  // A1 before the correction
  StateVector bob_precorrection;    // B2 before the correction
  StateVector alice_final;          // A1, should equal Bob's target
  StateVector bob_final;            // B2, should equal Alice's target
  CorrectionRule corrections;
  bool alice_recovered = false;
  bool bob_recovered = false;
};

/// (1/sqrt N) sum_j e^{i theta_j} |j>
StateVector equatorial_state(const PhaseVector& p);

/// (1/sqrt N) sum_j |jjj>
StateVector ghz_state(std::size_t dim);

/// ghz (x) ghz on (A1, B1, C1, A2, B2, C2).
StateVector channel_state(std::size_t dim);

/// |tau_l> = (1/sqrt N) sum_j e^{i 2 pi j l / N} e^{-i theta_j} |j>
MeasurementBasis sender_basis(const PhaseVector& p);

/// |tau_k> = (1/sqrt N) sum_j e^{i 2 pi j k / N} |j>
MeasurementBasis fourier_basis(std::size_t dim);

/// U_k = sum_j e^{i 2 pi j k / N} |j><j|
Operator correction_unitary(std::size_t k, std::size_t dim);

/// State left on the receiving particle when the relevant outcome sum is idx:
/// (1/sqrt N) sum_j e^{-i 2 pi j idx / N} e^{i theta_j} |j>, so that
/// U_idx applied to it gives back equatorial_state(p).
StateVector collapsed_state(const PhaseVector& p, std::size_t idx);

struct SampledOutcome {
  std::uint64_t seed = 0;
};
using OutcomeChoice = std::variant<OutcomeTuple, SampledOutcome>;

/// Per-measurement seeds derived from a session seed; shared with the session
/// layer so both paths draw identical outcomes.
std::uint64_t measurement_seed(std::uint64_t seed, Particle measured);

/// Six-qudit register that tracks which particle each remaining subsystem is.
class Register {
 public:
  explicit Register(StateVector state);  // full channel in kChannelOrder

  const StateVector& state() const { return state_; }
  const std::vector<Particle>& particles() const { return labels_; }
  std::size_t index_of(Particle p) const;
  bool holds(Particle p) const;

  /// Projects `p` onto basis[outcome] (forced) and removes it. Throws
  /// std::logic_error on a zero-probability outcome.
  double project(Particle p, const MeasurementBasis& basis, std::size_t outcome);
  /// Born-rule sampling; returns the outcome index.
  std::size_t measure(Particle p, const MeasurementBasis& basis, std::uint64_t seed);
  void apply(Particle p, const Operator& op);

 private:
  StateVector state_;
  std::vector<Particle> labels_;
};

/// Split a two-qudit product state into its factors. Throws
/// std::invalid_argument when the state is entangled beyond kStructuralTol.
std::pair<StateVector, StateVector> split_product(const StateVector& state);

/// Step 3 on a register that holds only A1 and B2: split the product, apply
/// the corrections dictated by `t`, and check both targets.
ProtocolResult finish_protocol(const Register& reg, const PhaseVector& alice,
                               const PhaseVector& bob, const OutcomeTuple& t);

/// Full ideal run: measurements on A2, B1, C1, C2 in that order, followed by
/// U_{m(+)n} on A1 and U_{k(+)l} on B2.
ProtocolResult run_protocol(const PhaseVector& alice, const PhaseVector& bob,
                            const OutcomeChoice& outcome);

/// Joint Born probability of the four announcements in the noiseless protocol.
double outcome_probability(const PhaseVector& alice, const PhaseVector& bob, const OutcomeTuple& t);
double outcome_probability(std::size_t dim, const OutcomeTuple& t);

struct CorrectionRow {
  OutcomeTuple outcome;
  CorrectionRule rule;
};

/// All N^4 rows, ordered by (l, n, m, k) with k varying fastest.
std::vector<CorrectionRow> build_correction_table(std::size_t dim);

struct DecompositionCheck {
  bool ok = false;
  double max_deviation = 0.0;
};

/// Rebuilds the channel from its measurement-basis expansion,
///   (1/N^2) sum_{k,l,m,n} |tau_m>_C1 |tau~_n>_B1 |z~_{m(+)n}>_A1
///                       |tau_k>_C2 |tau_l>_A2  |z_{k(+)l}>_B2,
/// and compares it entrywise with ghz (x) ghz.
DecompositionCheck verify_decomposition(const PhaseVector& alice, const PhaseVector& bob);

}  // namespace bcrsp
