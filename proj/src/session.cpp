#include "bcrsp/session.hpp"

#include <stdexcept>

#include <json.hpp>

namespace bcrsp::session {

namespace {

constexpr std::string_view kAliceLabel = "A2/tau";
constexpr std::string_view kBobLabel = "B1/tau_tilde";
constexpr std::string_view kC1Label = "C1/tau_bar";
constexpr std::string_view kC2Label = "C2/tau_bar";
constexpr std::string_view kOutcomeKind = "outcome";

PartyId party_from(std::string_view s) {
  if (s == "alice") return PartyId::Alice;
  if (s == "bob") return PartyId::Bob;
  if (s == "charlie") return PartyId::Charlie;
  throw std::invalid_argument("transcript: unknown party '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(PartyId p) {
  switch (p) {
    case PartyId::Alice: return "alice";
    case PartyId::Bob: return "bob";
    case PartyId::Charlie: return "charlie";
  }
  return "?";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Ready: return "ready";
    case SessionStatus::Announced: return "announced";
    case SessionStatus::ControllerDone: return "controller_done";
    case SessionStatus::Completed: return "completed";
    case SessionStatus::Aborted: return "aborted";
  }
  return "?";
}

Session::Session(PhaseVector alice, PhaseVector bob, bool consents, std::uint64_t seed,
                 std::optional<OutcomeTuple> forced)
    : alice_phases_(std::move(alice)),
      bob_phases_(std::move(bob)),
      consents_(consents),
      seed_(seed),
      forced_(forced),
      reg_(channel_state(alice_phases_.dim())) {}

Session Session::create(const PhaseVector& alice, const PhaseVector& bob, std::size_t dim,
                        bool charlie_consents, std::uint64_t seed, std::optional<OutcomeTuple> forced) {
  if (dim < 2) throw std::invalid_argument("Session: dimension must be at least 2");
  if (alice.dim() != dim || bob.dim() != dim) {
    throw DimensionError("Session: phase vectors must both have dimension " + std::to_string(dim));
  }
  if (forced && !forced->valid_for(dim)) throw std::invalid_argument("Session: forced outcome out of range");
  return Session(alice, bob, charlie_consents, seed, forced);
}

void Session::send(PartyId from, PartyId to, int step, std::string basis_label, std::size_t outcome) {
  ClassicalMessage msg{from, to, step, std::string(kOutcomeKind), std::move(basis_label), outcome};
  log_.push_back(msg);
  parties_[static_cast<std::size_t>(to)].inbox.push_back(std::move(msg));
}

std::optional<std::size_t> Session::heard(PartyId receiver, std::string_view basis_label) const {
  for (const auto& m : party(receiver).inbox) {
    if (m.basis_label == basis_label) return m.outcome_index;
  }
  return std::nullopt;
}

std::size_t Session::measure(Particle p, const MeasurementBasis& basis, std::size_t forced_index) {
  if (forced_) {
    reg_.project(p, basis, forced_index);
    return forced_index;
  }
  return reg_.measure(p, basis, measurement_seed(seed_, p));
}

void Session::step_senders() {
  auto& alice = parties_[static_cast<std::size_t>(PartyId::Alice)];
  auto& bob = parties_[static_cast<std::size_t>(PartyId::Bob)];
  // Disjoint particles: the order of these two measurements is unobservable.
  alice.own_outcome = measure(Particle::A2, sender_basis(alice_phases_), forced_ ? forced_->l : 0);
  bob.own_outcome = measure(Particle::B1, sender_basis(bob_phases_), forced_ ? forced_->n : 0);
  send(PartyId::Alice, PartyId::Bob, 1, std::string(kAliceLabel), *alice.own_outcome);
  send(PartyId::Alice, PartyId::Charlie, 1, std::string(kAliceLabel), *alice.own_outcome);
  send(PartyId::Bob, PartyId::Alice, 1, std::string(kBobLabel), *bob.own_outcome);
  send(PartyId::Bob, PartyId::Charlie, 1, std::string(kBobLabel), *bob.own_outcome);
  alice.step = bob.step = 1;
  status_ = SessionStatus::Announced;
}

void Session::step_controller() {
  auto& charlie = parties_[static_cast<std::size_t>(PartyId::Charlie)];
  if (!heard(PartyId::Charlie, kAliceLabel) || !heard(PartyId::Charlie, kBobLabel)) {
    throw std::logic_error("Session: controller acting before both announcements arrived");
  }
  charlie.step = 2;
  if (!consents_) {
    for (auto& p : parties_) p.discarded = true;
    status_ = SessionStatus::Aborted;
    return;
  }
  const MeasurementBasis f = fourier_basis(dimension());
  const std::size_t m = measure(Particle::C1, f, forced_ ? forced_->m : 0);
  const std::size_t k = measure(Particle::C2, f, forced_ ? forced_->k : 0);
  send(PartyId::Charlie, PartyId::Alice, 2, std::string(kC1Label), m);
  send(PartyId::Charlie, PartyId::Alice, 2, std::string(kC2Label), k);
  send(PartyId::Charlie, PartyId::Bob, 2, std::string(kC1Label), m);
  send(PartyId::Charlie, PartyId::Bob, 2, std::string(kC2Label), k);
  status_ = SessionStatus::ControllerDone;
}

void Session::step_corrections() {
  const std::size_t n = dimension();
  auto& alice = parties_[static_cast<std::size_t>(PartyId::Alice)];
  auto& bob = parties_[static_cast<std::size_t>(PartyId::Bob)];

  // Each receiver works only from its own outcome and its inbox.
  const auto bob_n = heard(PartyId::Alice, kBobLabel);
  const auto m = heard(PartyId::Alice, kC1Label);
  const auto alice_l = heard(PartyId::Bob, kAliceLabel);
  const auto k = heard(PartyId::Bob, kC2Label);
  if (!bob_n || !m || !alice_l || !k) throw std::logic_error("Session: missing announcement before Step 3");
  alice.correction_index = add_mod(*m, *bob_n, n);
  bob.correction_index = add_mod(*k, *alice_l, n);

  const OutcomeTuple t{*alice.own_outcome, *bob.own_outcome, *m, *k};
  result_ = finish_protocol(reg_, alice_phases_, bob_phases_, t);
  if (result_->corrections.a1_index != *alice.correction_index ||
      result_->corrections.b2_index != *bob.correction_index) {
    throw std::logic_error("Session: local corrections disagree with the outcome tuple");
  }
  alice.step = bob.step = 3;
  status_ = SessionStatus::Completed;
}

SessionStatus Session::advance() {
  switch (status_) {
    case SessionStatus::Ready: step_senders(); break;
    case SessionStatus::Announced: step_controller(); break;
    case SessionStatus::ControllerDone: step_corrections(); break;
    case SessionStatus::Completed:
    case SessionStatus::Aborted:
      throw std::logic_error("Session: cannot advance a finished session");
  }
  return status_;
}

SessionStatus Session::run() {
  while (!terminal()) advance();
  return status_;
}

std::optional<OutcomeTuple> Session::outcomes() const {
  if (!result_) return std::nullopt;
  return result_->outcome;
}

BranchEnsemble Session::reduced_state(Particle p) const {
  if (reg_.particles().size() == 1) return BranchEnsemble::pure(reg_.state());
  return reduce_to(reg_.state(), reg_.index_of(p));
}

Transcript Session::transcript() const {
  if (!terminal()) throw std::logic_error("Session: transcript requested before the session finished");
  return {dimension(), status_ == SessionStatus::Completed ? TranscriptStatus::Completed : TranscriptStatus::Aborted,
          log_};
}

std::string to_json(const Transcript& t) {
  nlohmann::ordered_json j;
  j["version"] = Transcript::kVersion;
  j["dimension"] = t.dimension;
  j["status"] = t.status == TranscriptStatus::Completed ? "completed" : "aborted";
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : t.messages) {
    nlohmann::ordered_json e;
    e["from"] = to_string(m.from);
    e["to"] = to_string(m.to);
    e["step"] = m.step;
    e["kind"] = m.kind;
    e["basis_label"] = m.basis_label;
    e["outcome_index"] = m.outcome_index;
    j["messages"].push_back(std::move(e));
  }
  return j.dump(2);
}

std::string export_transcript(const Session& s) { return to_json(s.transcript()); }

Transcript import_transcript(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("transcript: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != Transcript::kVersion) {
      throw std::invalid_argument("transcript: unsupported version");
    }
    Transcript t;
    t.dimension = j.at("dimension").get<std::size_t>();
    const auto status = j.at("status").get<std::string>();
    if (status == "completed") {
      t.status = TranscriptStatus::Completed;
    } else if (status == "aborted") {
      t.status = TranscriptStatus::Aborted;
    } else {
      throw std::invalid_argument("transcript: unknown status '" + status + "'");
    }
    for (const auto& e : j.at("messages")) {
      ClassicalMessage m;
      m.from = party_from(e.at("from").get<std::string>());
      m.to = party_from(e.at("to").get<std::string>());
      m.step = e.at("step").get<int>();
      m.kind = e.at("kind").get<std::string>();
      m.basis_label = e.at("basis_label").get<std::string>();
      m.outcome_index = e.at("outcome_index").get<std::size_t>();
      if (m.outcome_index >= t.dimension) throw std::invalid_argument("transcript: outcome index out of range");
      t.messages.push_back(std::move(m));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("transcript: ") + e.what());
  }
}

}  // namespace bcrsp::session
