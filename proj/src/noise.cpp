#include "bcrsp/noise.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bcrsp::noise {

namespace {

Operator shift_with_phase(std::size_t dim, std::size_t shift, std::size_t phase_power, double coeff) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t j = 0; j < dim; ++j) {
    m(static_cast<Eigen::Index>(add_mod(j, shift, dim)), static_cast<Eigen::Index>(j)) =
        coeff * root_of_unity(static_cast<long long>(j * phase_power), dim);
  }
  return Operator(std::move(m));
}

void require_dim(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("noise: dimension must be at least 2");
}

// Noisy particles in the order the branches are enumerated.
constexpr std::array<Particle, 4> kNoisy = {Particle::B1, Particle::C1, Particle::A2, Particle::C2};

struct Accumulator {
  std::size_t dim;
  std::size_t rank;  // Kraus operators per particle
  StateVector target_a1;
  StateVector target_b2;
  // Per noisy particle: its measurement analyzer times each Kraus operator.
  std::array<std::vector<Operator>, 4> level_ops;
  std::vector<OutcomeTuple> tuples;
  Eigen::MatrixXcd roots;  // roots(a, c) = e^{i 2 pi a c / N}
  Eigen::MatrixXcd rho_a1;
  Eigen::MatrixXcd rho_b2;
  std::vector<double> pair_weight_a1, pair_overlap_a1;
  std::vector<double> pair_weight_b2, pair_overlap_b2;
  std::size_t leaves = 0;
  double total_weight = 0.0;
  double tuple_mass = 0.0;
};

void evaluate_leaf(Accumulator& acc, const StateVector& branch, const std::array<std::size_t, 4>& kraus_idx) {
  const std::size_t n = acc.dim;
  const double w = branch.amplitudes().squaredNorm();
  ++acc.leaves;
  acc.total_weight += w;

  const Eigen::VectorXcd& amp = branch.amplitudes();

  const auto& ta = acc.target_a1.amplitudes();
  const auto& tb = acc.target_b2.amplitudes();
  const auto nn = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd phi(nn, nn);  // phi(a1, b2)
  double overlap_a1 = 0.0;
  double overlap_b2 = 0.0;
  for (const auto& t : acc.tuples) {
    const std::size_t a1_corr = add_mod(t.m, t.n, n);
    const std::size_t b2_corr = add_mod(t.k, t.l, n);
    for (std::size_t a1 = 0; a1 < n; ++a1) {
      for (std::size_t b2 = 0; b2 < n; ++b2) {
        const std::size_t idx = ((((a1 * n + t.n) * n + t.m) * n + t.l) * n + b2) * n + t.k;
        phi(static_cast<Eigen::Index>(a1), static_cast<Eigen::Index>(b2)) =
            acc.roots(static_cast<Eigen::Index>(a1), static_cast<Eigen::Index>(a1_corr)) *
            acc.roots(static_cast<Eigen::Index>(b2), static_cast<Eigen::Index>(b2_corr)) *
            amp[static_cast<Eigen::Index>(idx)];
      }
    }
    acc.tuple_mass += phi.squaredNorm();
    acc.rho_a1.noalias() += phi * phi.adjoint();
    acc.rho_b2.noalias() += (phi.transpose() * phi.conjugate());
    overlap_a1 += (ta.adjoint() * phi).squaredNorm();
    overlap_b2 += (tb.adjoint() * phi.transpose()).squaredNorm();
  }
  const std::size_t pa = kraus_idx[0] * acc.rank + kraus_idx[1];
  const std::size_t pb = kraus_idx[2] * acc.rank + kraus_idx[3];
  acc.pair_weight_a1[pa] += w;
  acc.pair_overlap_a1[pa] += overlap_a1;
  acc.pair_weight_b2[pb] += w;
  acc.pair_overlap_b2[pb] += overlap_b2;
}

void descend(Accumulator& acc, const StateVector& state, std::size_t level, std::array<std::size_t, 4>& kraus_idx) {
  if (level == kNoisy.size()) {
    evaluate_leaf(acc, state, kraus_idx);
    return;
  }
  const auto target = static_cast<std::size_t>(kNoisy[level]);
  const auto& ops = acc.level_ops[level];
  for (std::size_t i = 0; i < ops.size(); ++i) {
    StateVector next = apply_on(ops[i], state, target);
    if (next.amplitudes().squaredNorm() <= kZeroProbability) continue;
    kraus_idx[level] = i;
    descend(acc, next, level + 1, kraus_idx);
  }
}

Eigen::MatrixXcd correction_phases(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd r(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index c = 0; c < n; ++c) r(a, c) = root_of_unity(static_cast<long long>(a * c), dim);
  return r;
}

std::vector<Contribution> collect(const std::vector<double>& weights, const std::vector<double>& overlaps,
                                  std::size_t rank, double scale) {
  std::vector<Contribution> out;
  for (std::size_t i = 0; i < rank; ++i) {
    for (std::size_t j = 0; j < rank; ++j) {
      const std::size_t p = i * rank + j;
      if (weights[p] <= 0.0) continue;
      out.push_back({i, j, weights[p], overlaps[p] / scale});
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::QuditFlip: return "qudit_flip";
    case NoiseKind::Dephasing: return "dephasing";
    case NoiseKind::QuditPhaseFlip: return "phase_flip";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "qudit_flip") return NoiseKind::QuditFlip;
  if (s == "dephasing") return NoiseKind::Dephasing;
  if (s == "phase_flip" || s == "qudit_phase_flip") return NoiseKind::QuditPhaseFlip;
  throw std::invalid_argument("unknown noise kind '" + std::string(s) + "'");
}

NoiseFactor::NoiseFactor(double gamma) : gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("noise factor must lie in [0, 1], got " + std::to_string(gamma));
  }
}

KrausSet qudit_flip_kraus(NoiseFactor gamma, std::size_t dim) {
  require_dim(dim);
  const double g = gamma.value();
  const double nd = static_cast<double>(dim);
  std::vector<Operator> ops;
  ops.push_back(shift_with_phase(dim, 0, 0, std::sqrt(1.0 - (nd - 1.0) * g / nd)));
  if (g > 0.0) {
    for (std::size_t l = 1; l < dim; ++l) ops.push_back(shift_with_phase(dim, l, 0, std::sqrt(g / nd)));
  }
  return KrausSet(dim, std::move(ops));
}

KrausSet dephasing_kraus(NoiseFactor gamma, std::size_t dim) {
  require_dim(dim);
  const double g = gamma.value();
  const auto n = static_cast<Eigen::Index>(dim);
  std::vector<Operator> ops;
  Eigen::MatrixXcd e0 = Eigen::MatrixXcd::Zero(n, n);
  e0(0, 0) = 1.0;
  for (Eigen::Index j = 1; j < n; ++j) e0(j, j) = std::sqrt(1.0 - g);
  ops.emplace_back(std::move(e0));
  if (g > 0.0) {
    for (Eigen::Index s = 1; s < n; ++s) {
      Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
      e(s, s) = std::sqrt(g);
      ops.emplace_back(std::move(e));
    }
  }
  return KrausSet(dim, std::move(ops));
}

KrausSet phase_flip_kraus(NoiseFactor gamma, std::size_t dim) {
  require_dim(dim);
  const double g = gamma.value();
  const double nd = static_cast<double>(dim);
  std::vector<Operator> ops;
  ops.push_back(shift_with_phase(dim, 0, 0, std::sqrt(1.0 - (nd - 1.0) * g / nd)));
  if (g > 0.0) {
    const double c = std::sqrt(g / (nd * (nd - 1.0)));
    for (std::size_t s1 = 1; s1 < dim; ++s1)
      for (std::size_t s2 = 1; s2 < dim; ++s2) ops.push_back(shift_with_phase(dim, s2, s1, c));
  }
  return KrausSet(dim, std::move(ops));
}

KrausSet kraus_for(NoiseKind kind, NoiseFactor gamma, std::size_t dim) {
  switch (kind) {
    case NoiseKind::QuditFlip: return qudit_flip_kraus(gamma, dim);
    case NoiseKind::Dephasing: return dephasing_kraus(gamma, dim);
    case NoiseKind::QuditPhaseFlip: return phase_flip_kraus(gamma, dim);
  }
  throw std::invalid_argument("unknown noise kind");
}

RunResult noisy_protocol_run(const PhaseVector& alice, const PhaseVector& bob, NoiseKind kind,
                             NoiseFactor gamma, const RunOptions& options) {
  const std::size_t n = alice.dim();
  if (bob.dim() != n) throw DimensionError("noisy_protocol_run: phase vectors differ in dimension");
  const KrausSet kraus = kraus_for(kind, gamma, n);
  const auto nn = static_cast<Eigen::Index>(n);

  // Kraus operator first, then the rotation into the measurement basis.
  const Operator charlie = fourier_basis(n).analyzer();
  const std::array<Operator, 4> analyzers = {sender_basis(bob).analyzer(), charlie,
                                             sender_basis(alice).analyzer(), charlie};
  std::array<std::vector<Operator>, 4> level_ops;
  for (std::size_t lv = 0; lv < kNoisy.size(); ++lv) {
    for (const auto& e : kraus.operators()) level_ops[lv].push_back(analyzers[lv] * e);
  }

  std::vector<OutcomeTuple> tuples;
  if (options.policy == OutcomePolicy::Conditioned) {
    if (!options.conditioned_on.valid_for(n)) throw std::invalid_argument("noisy_protocol_run: tuple out of range");
    tuples.push_back(options.conditioned_on);
  } else {
    for (const auto& row : build_correction_table(n)) tuples.push_back(row.outcome);
  }

  const std::size_t r = kraus.size();
  Accumulator acc{n,
                  r,
                  equatorial_state(bob),
                  equatorial_state(alice),
                  std::move(level_ops),
                  std::move(tuples),
                  correction_phases(n),
                  Eigen::MatrixXcd::Zero(nn, nn),
                  Eigen::MatrixXcd::Zero(nn, nn),
                  std::vector<double>(r * r, 0.0),
                  std::vector<double>(r * r, 0.0),
                  std::vector<double>(r * r, 0.0),
                  std::vector<double>(r * r, 0.0)};
  std::array<std::size_t, 4> idx{};
  descend(acc, channel_state(n), 0, idx);

  if (acc.tuple_mass <= kZeroProbability) {
    throw std::invalid_argument("noisy_protocol_run: conditioning outcome has zero probability");
  }
  const double mass = acc.tuple_mass;
  Diagnostics diag;
  diag.kraus_branches = acc.leaves;
  diag.outcome_tuples = acc.tuples.size();
  diag.total_weight = acc.total_weight;
  diag.outcome_probability = mass;
  diag.rho_a1 = acc.rho_a1 / mass;
  diag.rho_b2 = acc.rho_b2 / mass;
  diag.a1_breakdown = collect(acc.pair_weight_a1, acc.pair_overlap_a1, r, mass);
  diag.b2_breakdown = collect(acc.pair_weight_b2, acc.pair_overlap_b2, r, mass);

  BranchEnsemble a1 = BranchEnsemble::from_density(Dims{n}, diag.rho_a1);
  BranchEnsemble b2 = BranchEnsemble::from_density(Dims{n}, diag.rho_b2);
  const double fa = fidelity(acc.target_a1, a1);
  const double fb = fidelity(acc.target_b2, b2);
  return RunResult{std::move(a1), std::move(b2), fa, fb, std::move(diag)};
}

double paper_fidelity_dephasing(NoiseFactor gamma) {
  const double g = gamma.value();
  const double s = std::sqrt(1.0 - g);
  const double a = 1.0 + 6.0 * s + 9.0 * (1.0 - g);
  const double b = 1.0 + 3.0 * s;
  return std::sqrt(a * a + 6.0 * g * b * b + 9.0 * g * g) / 16.0;
}

double paper_fidelity_phaseflip_equatorial(NoiseFactor gamma) { return 1.0 - 0.75 * gamma.value(); }

bool is_zero_phase(const PhaseVector& p) {
  for (double t : p.phases()) {
    const double wrapped = std::remainder(t, 2.0 * std::numbers::pi);
    if (std::abs(wrapped) > 1e-12) return false;
  }
  return true;
}

std::optional<double> paper_fidelity(NoiseKind kind, const PhaseVector& target, NoiseFactor gamma) {
  switch (kind) {
    case NoiseKind::Dephasing: return paper_fidelity_dephasing(gamma);
    case NoiseKind::QuditFlip:
      if (is_zero_phase(target)) return 1.0;
      return std::nullopt;
    case NoiseKind::QuditPhaseFlip:
      if (is_zero_phase(target)) return paper_fidelity_phaseflip_equatorial(gamma);
      return std::nullopt;
  }
  return std::nullopt;
}

std::size_t ComparisonReport::flagged_count() const {
  std::size_t c = 0;
  for (const auto& r : rows) c += r.flagged ? 1 : 0;
  return c;
}

ComparisonReport compare_paper_vs_exact(NoiseKind kind, const PhaseVector& alice,
                                        const PhaseVector& bob, std::span<const double> gammas) {
  ComparisonReport report;
  report.kind = kind;
  for (double g : gammas) {
    const NoiseFactor gamma(g);
    RunResult run = noisy_protocol_run(alice, bob, kind, gamma);
    ComparisonRow row;
    row.gamma = g;
    row.exact_a1 = run.fidelity_a1;
    row.exact_b2 = run.fidelity_b2;
    // A1 receives Bob's state, so the published formula is evaluated on Bob's phases.
    row.paper = paper_fidelity(kind, bob, gamma);
    if (row.paper) {
      row.deviation = row.exact_a1 - *row.paper;
      row.flagged = std::abs(*row.deviation) > ComparisonReport::kFlagThreshold;
      if (row.flagged) row.breakdown = std::move(run.diagnostics.a1_breakdown);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace bcrsp::noise
