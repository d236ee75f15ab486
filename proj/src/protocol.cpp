#include "bcrsp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bcrsp {

std::string_view to_string(Particle p) {
  switch (p) {
    case Particle::A1: return "A1";
    case Particle::B1: return "B1";
    case Particle::C1: return "C1";
    case Particle::A2: return "A2";
    case Particle::B2: return "B2";
    case Particle::C2: return "C2";
  }
  return "?";
}

std::size_t add_mod(std::size_t a, std::size_t b, std::size_t n) { return (a % n + b % n) % n; }

PhaseVector::PhaseVector(std::vector<double> phases) : phases_(std::move(phases)) {
  if (phases_.empty()) throw std::invalid_argument("PhaseVector: dimension must be at least 2");
  for (double p : phases_) {
    if (!std::isfinite(p)) throw std::invalid_argument("PhaseVector: phases must be finite");
  }
}

PhaseVector PhaseVector::zero(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("PhaseVector: dimension must be at least 2");
  return PhaseVector(std::vector<double>(dim - 1, 0.0));
}

CorrectionRule correction_rule(const OutcomeTuple& t, std::size_t dim) {
  return {add_mod(t.m, t.n, dim), add_mod(t.k, t.l, dim)};
}

StateVector equatorial_state(const PhaseVector& p) {
  const std::size_t n = p.dim();
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) v[static_cast<Eigen::Index>(j)] = amp * unit_phase(p.theta(j));
  return StateVector(Dims{n}, std::move(v));
}

StateVector ghz_state(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("ghz_state: dimension must be at least 2");
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n * n * n);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index j = 0; j < n; ++j) v[j * n * n + j * n + j] = amp;
  return StateVector(Dims{dim, dim, dim}, std::move(v));
}

StateVector channel_state(std::size_t dim) {
  const StateVector g = ghz_state(dim);
  return tensor(g, g);
}

MeasurementBasis sender_basis(const PhaseVector& p) {
  const std::size_t n = p.dim();
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<StateVector> vs;
  vs.reserve(n);
  for (std::size_t l = 0; l < n; ++l) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      v[static_cast<Eigen::Index>(j)] =
          amp * root_of_unity(static_cast<long long>(j * l), n) * unit_phase(-p.theta(j));
    }
    vs.emplace_back(Dims{n}, std::move(v));
  }
  return MeasurementBasis(std::move(vs));
}

MeasurementBasis fourier_basis(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("fourier_basis: dimension must be at least 2");
  return sender_basis(PhaseVector::zero(dim));
}

Operator correction_unitary(std::size_t k, std::size_t dim) {
  if (k >= dim) throw std::invalid_argument("correction_unitary: index out of range");
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t j = 0; j < dim; ++j) {
    u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = root_of_unity(static_cast<long long>(j * k), dim);
  }
  return Operator::unitary(std::move(u));
}

StateVector collapsed_state(const PhaseVector& p, std::size_t idx) {
  const std::size_t n = p.dim();
  if (idx >= n) throw std::invalid_argument("collapsed_state: index out of range");
  const double amp = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::VectorXcd v(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    v[static_cast<Eigen::Index>(j)] =
        amp * root_of_unity(-static_cast<long long>(j * idx), n) * unit_phase(p.theta(j));
  }
  return StateVector(Dims{n}, std::move(v));
}

std::uint64_t measurement_seed(std::uint64_t seed, Particle measured) {
  return mix_seed(seed, static_cast<std::uint64_t>(measured));
}

// ---------------------------------------------------------------------------
// Register

Register::Register(StateVector state) : state_(std::move(state)), labels_(kChannelOrder.begin(), kChannelOrder.end()) {
  if (state_.subsystems() != labels_.size()) {
    throw DimensionError("Register: expected a six-particle channel state");
  }
}

std::size_t Register::index_of(Particle p) const {
  const auto it = std::find(labels_.begin(), labels_.end(), p);
  if (it == labels_.end()) {
    throw std::logic_error("Register: particle " + std::string(to_string(p)) + " already measured");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

bool Register::holds(Particle p) const { return std::find(labels_.begin(), labels_.end(), p) != labels_.end(); }

double Register::project(Particle p, const MeasurementBasis& basis, std::size_t outcome) {
  const std::size_t idx = index_of(p);
  if (outcome >= basis.dim()) throw std::invalid_argument("Register: outcome index out of range");
  Projection pr = bcrsp::project(state_, basis[outcome], idx);
  if (!pr.post_state) {
    throw std::logic_error("Register: zero-probability outcome " + std::to_string(outcome) +
                           " on " + std::string(to_string(p)));
  }
  state_ = std::move(*pr.post_state);
  labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(idx));
  return pr.probability;
}

std::size_t Register::measure(Particle p, const MeasurementBasis& basis, std::uint64_t seed) {
  const std::size_t idx = index_of(p);
  MeasurementOutcome out = bcrsp::measure(state_, basis, idx, seed);
  state_ = std::move(out.post_state);
  labels_.erase(labels_.begin() + static_cast<std::ptrdiff_t>(idx));
  return out.outcome;
}

void Register::apply(Particle p, const Operator& op) { state_ = apply_on(op, state_, index_of(p)); }

// ---------------------------------------------------------------------------
// Protocol run

std::pair<StateVector, StateVector> split_product(const StateVector& state) {
  if (state.subsystems() != 2) throw DimensionError("split_product: expected two subsystems");
  const auto da = static_cast<Eigen::Index>(state.dims()[0]);
  const auto db = static_cast<Eigen::Index>(state.dims()[1]);
  // Row-major reshape: row a, column b.
  Eigen::MatrixXcd m(da, db);
  for (Eigen::Index a = 0; a < da; ++a)
    for (Eigen::Index b = 0; b < db; ++b) m(a, b) = state.amplitudes()[a * db + b];
  Eigen::Index ra = 0, rb = 0;
  m.cwiseAbs().maxCoeff(&ra, &rb);
  const Eigen::VectorXcd x = m.col(rb);
  const Eigen::VectorXcd y = m.row(ra).transpose();
  StateVector first(Dims{state.dims()[0]}, x.normalized());
  StateVector second(Dims{state.dims()[1]}, y.normalized());
  const StateVector rebuilt = tensor(first, second);
  if (!same_up_to_phase(rebuilt, state)) {
    throw std::invalid_argument("split_product: state is entangled");
  }
  return {std::move(first), std::move(second)};
}

ProtocolResult finish_protocol(const Register& reg, const PhaseVector& alice,
                               const PhaseVector& bob, const OutcomeTuple& t) {
  const std::size_t n = alice.dim();
  if (reg.particles() != std::vector<Particle>{Particle::A1, Particle::B2}) {
    throw std::logic_error("finish_protocol: register must hold exactly A1 and B2");
  }
  auto [a1, b2] = split_product(reg.state());
  const CorrectionRule rule = correction_rule(t, n);
  StateVector a1_final = apply_on(correction_unitary(rule.a1_index, n), a1, 0).normalized();
  StateVector b2_final = apply_on(correction_unitary(rule.b2_index, n), b2, 0).normalized();
  const bool alice_ok = same_up_to_phase(a1_final, equatorial_state(bob));
  const bool bob_ok = same_up_to_phase(b2_final, equatorial_state(alice));
  return ProtocolResult{t, std::move(a1), std::move(b2), std::move(a1_final), std::move(b2_final),
                        rule, alice_ok, bob_ok};
}

ProtocolResult run_protocol(const PhaseVector& alice, const PhaseVector& bob,
                            const OutcomeChoice& outcome) {
  const std::size_t n = alice.dim();
  if (bob.dim() != n) throw DimensionError("run_protocol: phase vectors differ in dimension");

  Register reg(channel_state(n));
  const MeasurementBasis alice_basis = sender_basis(alice);
  const MeasurementBasis bob_basis = sender_basis(bob);
  const MeasurementBasis charlie_basis = fourier_basis(n);

  OutcomeTuple t;
  if (const auto* forced = std::get_if<OutcomeTuple>(&outcome)) {
    if (!forced->valid_for(n)) throw std::invalid_argument("run_protocol: outcome index out of range");
    t = *forced;
    reg.project(Particle::A2, alice_basis, t.l);
    reg.project(Particle::B1, bob_basis, t.n);
    reg.project(Particle::C1, charlie_basis, t.m);
    reg.project(Particle::C2, charlie_basis, t.k);
  } else {
    const std::uint64_t seed = std::get<SampledOutcome>(outcome).seed;
    t.l = reg.measure(Particle::A2, alice_basis, measurement_seed(seed, Particle::A2));
    t.n = reg.measure(Particle::B1, bob_basis, measurement_seed(seed, Particle::B1));
    t.m = reg.measure(Particle::C1, charlie_basis, measurement_seed(seed, Particle::C1));
    t.k = reg.measure(Particle::C2, charlie_basis, measurement_seed(seed, Particle::C2));
  }
  return finish_protocol(reg, alice, bob, t);
}

double outcome_probability(const PhaseVector& alice, const PhaseVector& bob, const OutcomeTuple& t) {
  const std::size_t n = alice.dim();
  if (bob.dim() != n) throw DimensionError("outcome_probability: phase vectors differ in dimension");
  if (!t.valid_for(n)) throw std::invalid_argument("outcome_probability: outcome index out of range");
  // Rotate every measured particle into its measurement basis; the squared
  // amplitudes at digits (l, n, m, k) then give the joint distribution.
  StateVector s = channel_state(n);
  s = apply_on(sender_basis(alice).analyzer(), s, static_cast<std::size_t>(Particle::A2));
  s = apply_on(sender_basis(bob).analyzer(), s, static_cast<std::size_t>(Particle::B1));
  const Operator f = fourier_basis(n).analyzer();
  s = apply_on(f, s, static_cast<std::size_t>(Particle::C1));
  s = apply_on(f, s, static_cast<std::size_t>(Particle::C2));
  double p = 0.0;
  for (std::size_t a1 = 0; a1 < n; ++a1) {
    for (std::size_t b2 = 0; b2 < n; ++b2) {
      const std::size_t digits[] = {a1, t.n, t.m, t.l, b2, t.k};
      std::size_t idx = 0;
      for (auto d : digits) idx = idx * n + d;
      p += std::norm(s[idx]);
    }
  }
  return p;
}

double outcome_probability(std::size_t dim, const OutcomeTuple& t) {
  const PhaseVector zero = PhaseVector::zero(dim);
  return outcome_probability(zero, zero, t);
}

std::vector<CorrectionRow> build_correction_table(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("build_correction_table: dimension must be at least 2");
  std::vector<CorrectionRow> rows;
  rows.reserve(dim * dim * dim * dim);
  for (std::size_t l = 0; l < dim; ++l)
    for (std::size_t n = 0; n < dim; ++n)
      for (std::size_t m = 0; m < dim; ++m)
        for (std::size_t k = 0; k < dim; ++k) {
          const OutcomeTuple t{l, n, m, k};
          rows.push_back({t, correction_rule(t, dim)});
        }
  return rows;
}

DecompositionCheck verify_decomposition(const PhaseVector& alice, const PhaseVector& bob) {
  const std::size_t n = alice.dim();
  if (bob.dim() != n) throw DimensionError("verify_decomposition: phase vectors differ in dimension");
  const MeasurementBasis tau = sender_basis(alice);
  const MeasurementBasis tau_tilde = sender_basis(bob);
  const MeasurementBasis tau_bar = fourier_basis(n);

  const auto total = static_cast<Eigen::Index>(n * n * n * n * n * n);
  Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(total);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t m = 0; m < n; ++m)
        for (std::size_t nn = 0; nn < n; ++nn) {
          StateVector term = collapsed_state(bob, add_mod(m, nn, n));  // A1
          term = tensor(term, tau_tilde[nn]);                          // B1
          term = tensor(term, tau_bar[m]);                             // C1
          term = tensor(term, tau[l]);                                 // A2
          term = tensor(term, collapsed_state(alice, add_mod(k, l, n)));  // B2
          term = tensor(term, tau_bar[k]);                             // C2
          sum += term.amplitudes();
        }
  sum /= static_cast<double>(n * n);
  const double dev = (sum - channel_state(n).amplitudes()).cwiseAbs().maxCoeff();
  return {dev <= kStructuralTol, dev};
}

}  // namespace bcrsp
