#pragma once

// Three-party choreography for one protocol run. Each party is a small state
// machine with its own inbox; classical messages travel over an in-process
// channel that is reliable, ordered and instantaneous.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcrsp/protocol.hpp"

namespace bcrsp::session {

enum class PartyId { Alice, Bob, Charlie };

std::string_view to_string(PartyId p);

struct ClassicalMessage {
  PartyId from = PartyId::Alice;
  PartyId to = PartyId::Alice;
  int step = 0;
  std::string kind;         // "outcome"
  std::string basis_label;  // e.g. "A2/tau"
  std::size_t outcome_index = 0;

  friend bool operator==(const ClassicalMessage&, const ClassicalMessage&) = default;
};

enum class TranscriptStatus { Completed, Aborted };

struct Transcript {
  static constexpr int kVersion = 1;
  std::size_t dimension = 0;
  TranscriptStatus status = TranscriptStatus::Completed;
  std::vector<ClassicalMessage> messages;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

enum class SessionStatus { Ready, Announced, ControllerDone, Completed, Aborted };

std::string_view to_string(SessionStatus s);

struct PartyState {
  int step = 0;  // last protocol step this party finished
  std::vector<ClassicalMessage> inbox;
  std::optional<std::size_t> own_outcome;      // Alice: l, Bob: n
  std::optional<std::size_t> correction_index;  // set in Step 3
  bool discarded = false;
};

class Session {
 public:
  /// Throws DimensionError when the phase vectors do not both have dimension
  /// `dim`, and std::invalid_argument when dim < 2. With `forced` set, the
  /// measurements take those outcomes instead of sampling from `seed`.
  static Session create(const PhaseVector& alice, const PhaseVector& bob, std::size_t dim,
                        bool charlie_consents, std::uint64_t seed,
                        std::optional<OutcomeTuple> forced = std::nullopt);

  /// Runs the next step. Throws std::logic_error when already terminal.
  SessionStatus advance();
  /// Advances until Completed or Aborted.
  SessionStatus run();

  SessionStatus status() const { return status_; }
  bool terminal() const { return status_ == SessionStatus::Completed || status_ == SessionStatus::Aborted; }
  std::size_t dimension() const { return alice_phases_.dim(); }
  const std::vector<ClassicalMessage>& messages() const { return log_; }
  const PartyState& party(PartyId p) const { return parties_[static_cast<std::size_t>(p)]; }

  /// Outcome tuple once every measurement happened.
  std::optional<OutcomeTuple> outcomes() const;
  /// Present after a completed run.
  const std::optional<ProtocolResult>& result() const { return result_; }

  /// Reduced state of one particle still in the register, obtained by tracing
  /// out every other remaining particle. The register is kept for inspection
  /// after an abort even though the parties discard their qudits.
  BranchEnsemble reduced_state(Particle p) const;
  const Register& quantum_register() const { return reg_; }

  Transcript transcript() const;

 private:
  Session(PhaseVector alice, PhaseVector bob, bool consents, std::uint64_t seed,
          std::optional<OutcomeTuple> forced);

  void send(PartyId from, PartyId to, int step, std::string basis_label, std::size_t outcome);
  std::optional<std::size_t> heard(PartyId receiver, std::string_view basis_label) const;
  std::size_t measure(Particle p, const MeasurementBasis& basis, std::size_t forced_index);

  void step_senders();
  void step_controller();
  void step_corrections();

  PhaseVector alice_phases_;
  PhaseVector bob_phases_;
  bool consents_;
  std::uint64_t seed_;
  std::optional<OutcomeTuple> forced_;
  Register reg_;
  SessionStatus status_ = SessionStatus::Ready;
  std::array<PartyState, 3> parties_{};
  std::vector<ClassicalMessage> log_;
  std::optional<ProtocolResult> result_;
};

/// JSON object {version, dimension, status, messages:[{from, to, step, kind,
/// basis_label, outcome_index}]} with that field order. Throws
/// std::logic_error for a session that has not finished.
std::string export_transcript(const Session& s);
std::string to_json(const Transcript& t);
/// Throws std::invalid_argument on malformed input or a wrong version.
Transcript import_transcript(std::string_view json);

}  // namespace bcrsp::session
