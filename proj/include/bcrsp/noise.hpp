#pragma once

// Noise on the distributed particles of the two GHZ channels and exact
// evaluation of the protocol under it.
//
// Only B1, C1 (channel 1) and A2, C2 (channel 2) pass through the noisy
// channel; A1 and B2 stay with the party that prepared the GHZ state.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bcrsp/protocol.hpp"
#include "bcrsp/qudit.hpp"

namespace bcrsp::noise {

enum class NoiseKind { QuditFlip, Dephasing, QuditPhaseFlip };

std::string_view to_string(NoiseKind k);
/// Accepts "qudit_flip", "dephasing", "phase_flip" (and "qudit_phase_flip").
/// Throws std::invalid_argument otherwise.
NoiseKind parse_noise_kind(std::string_view s);

class NoiseFactor {
 public:
  /// Throws std::invalid_argument unless 0 <= gamma <= 1.
  explicit NoiseFactor(double gamma);
  double value() const { return gamma_; }

 private:
  double gamma_;
};

/// E_l = g_l sum_j |j (+) l><j| with g_0 = sqrt(1 - (N-1) gamma / N) and
/// g_l = sqrt(gamma / N) otherwise.
KrausSet qudit_flip_kraus(NoiseFactor gamma, std::size_t dim = 4);

/// E_0 = diag(1, sqrt(1-gamma), ..., sqrt(1-gamma)), E_s = sqrt(gamma) |s><s|.
KrausSet dephasing_kraus(NoiseFactor gamma, std::size_t dim = 4);

/// E_00 = sqrt(1 - (N-1) gamma / N) I and, for s1, s2 in 1..N-1,
/// E_{s1 s2} = sqrt(gamma / (N (N-1))) sum_j e^{i 2 pi j s1 / N} |j (+) s2><j|.
/// Operators with a mixed zero index carry no weight and are not emitted.
KrausSet phase_flip_kraus(NoiseFactor gamma, std::size_t dim = 4);

KrausSet kraus_for(NoiseKind kind, NoiseFactor gamma, std::size_t dim);

enum class OutcomePolicy { Averaged, Conditioned };

struct RunOptions {
  OutcomePolicy policy = OutcomePolicy::Averaged;
  OutcomeTuple conditioned_on{};  // used when policy == Conditioned
};

/// Contribution of one pair of Kraus indices to <target|rho|target>. For A1
/// the pair is (B1 operator, C1 operator); for B2 it is (A2, C2).
struct Contribution {
  std::size_t first = 0;
  std::size_t second = 0;
  double weight = 0.0;   // probability mass of the Kraus pair
  double overlap = 0.0;  // its share of <target|rho|target>
};

struct Diagnostics {
  std::size_t kraus_branches = 0;   // six-qudit branches with non-zero weight
  std::size_t outcome_tuples = 0;   // tuples evaluated per branch
  double total_weight = 0.0;        // sum of branch weights, ~1
  double outcome_probability = 0.0; // mass of the evaluated tuples
  Eigen::MatrixXcd rho_a1;
  Eigen::MatrixXcd rho_b2;
  std::vector<Contribution> a1_breakdown;
  std::vector<Contribution> b2_breakdown;
};

struct RunResult {
  BranchEnsemble a1;  // should approximate Bob's state
  BranchEnsemble b2;  // should approximate Alice's state
  double fidelity_a1 = 0.0;
  double fidelity_b2 = 0.0;
  Diagnostics diagnostics;
};

/// Applies the channel to B1, C1, A2, C2 of ghz (x) ghz, runs every branch
/// through the measurements and corrections, and returns the final states of
/// A1 and B2 either averaged over all outcome tuples (weighted by their
/// probability) or conditioned on one tuple. Branches are enumerated depth
/// first, so memory stays at one register per noisy particle.
///
/// Throws std::invalid_argument when the conditioned tuple has zero
/// probability and DimensionError on mismatched phase vectors.
RunResult noisy_protocol_run(const PhaseVector& alice, const PhaseVector& bob, NoiseKind kind,
                             NoiseFactor gamma, const RunOptions& options = {});

/// Closed form printed for the dephasing channel:
/// (1/16) sqrt([1 + 6 s + 9 (1-g)]^2 + 6 g (1 + 3 s)^2 + 9 g^2), s = sqrt(1-g).
double paper_fidelity_dephasing(NoiseFactor gamma);

/// 1 - 3 gamma / 4, printed for an all-zero-phase target.
double paper_fidelity_phaseflip_equatorial(NoiseFactor gamma);

/// Published closed-form fidelity at A1 for the given target phases, when one
/// exists: dephasing always; qudit-flip (unity) and phase-flip only for the
/// all-zero-phase target.
std::optional<double> paper_fidelity(NoiseKind kind, const PhaseVector& target, NoiseFactor gamma);

bool is_zero_phase(const PhaseVector& p);

struct ComparisonRow {
  double gamma = 0.0;
  double exact_a1 = 0.0;
  double exact_b2 = 0.0;
  std::optional<double> paper;
  std::optional<double> deviation;  // exact_a1 - paper
  bool flagged = false;             // |deviation| > kFlagThreshold
  std::vector<Contribution> breakdown;  // filled for flagged rows
};

struct ComparisonReport {
  static constexpr double kFlagThreshold = 1e-6;
  NoiseKind kind = NoiseKind::QuditFlip;
  std::vector<ComparisonRow> rows;

  std::size_t flagged_count() const;
};

ComparisonReport compare_paper_vs_exact(NoiseKind kind, const PhaseVector& alice,
                                        const PhaseVector& bob, std::span<const double> gammas);

}  // namespace bcrsp::noise
