#include "bcrsp/checks.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "bcrsp/noise.hpp"
#include "bcrsp/optics.hpp"
#include "bcrsp/protocol.hpp"
#include "bcrsp/session.hpp"

namespace bcrsp::checks {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PhaseVector random_phases(std::size_t dim, std::uint64_t seed) {
  std::vector<double> p(dim - 1);
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = 2.0 * std::numbers::pi * uniform_from_seed(mix_seed(seed, j));
  }
  return PhaseVector(std::move(p));
}

Eigen::MatrixXcd random_unitary(std::size_t dim, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd g(n, n);
  std::uint64_t s = seed;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = uniform_from_seed(s = mix_seed(s, 1)) - 0.5;
      const double im = uniform_from_seed(s = mix_seed(s, 2)) - 0.5;
      g(i, j) = Complex(re, im);
    }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

CheckResult recovery(const SuiteOptions& o) {
  std::size_t runs = 0, failures = 0;
  for (std::size_t dim = 2; dim <= 4; ++dim) {
    for (int r = 0; r < o.random_phase_pairs; ++r) {
      const std::uint64_t base = mix_seed(o.seed, dim * 1000 + static_cast<std::size_t>(r));
      const PhaseVector a = random_phases(dim, mix_seed(base, 1));
      const PhaseVector b = random_phases(dim, mix_seed(base, 2));
      for (const auto& row : build_correction_table(dim)) {
        const ProtocolResult res = run_protocol(a, b, row.outcome);
        ++runs;
        if (!res.alice_recovered || !res.bob_recovered) ++failures;
      }
    }
  }
  return {"recovery", failures == 0, std::to_string(runs) + " runs, " + std::to_string(failures) + " failures"};
}

CheckResult decomposition(const SuiteOptions& o) {
  double worst = 0.0;
  for (std::size_t dim = 2; dim <= 4; ++dim) {
    const DecompositionCheck c =
        verify_decomposition(random_phases(dim, mix_seed(o.seed, 10 + dim)), random_phases(dim, mix_seed(o.seed, 20 + dim)));
    worst = std::max(worst, c.max_deviation);
  }
  return {"decomposition", worst <= kStructuralTol, fmt("max deviation %.3e", worst)};
}

CheckResult uniformity() {
  double worst = 0.0;
  for (std::size_t dim = 2; dim <= 4; ++dim) {
    const double expected = 1.0 / std::pow(static_cast<double>(dim), 4);
    for (const auto& row : build_correction_table(dim)) {
      worst = std::max(worst, std::abs(outcome_probability(dim, row.outcome) - expected));
    }
  }
  return {"outcome uniformity", worst <= kStructuralTol, fmt("max deviation %.3e", worst)};
}

CheckResult completeness() {
  double worst = 0.0;
  for (auto kind : {noise::NoiseKind::QuditFlip, noise::NoiseKind::Dephasing, noise::NoiseKind::QuditPhaseFlip}) {
    for (int i = 0; i < 20; ++i) {
      const noise::NoiseFactor g(static_cast<double>(i) / 19.0);
      worst = std::max(worst, noise::kraus_for(kind, g, 4).completeness_defect());
    }
  }
  return {"kraus completeness", worst <= kStructuralTol, fmt("max defect %.3e", worst)};
}

CheckResult noise_claims() {
  const PhaseVector zero = PhaseVector::zero(4);
  double flip = 0.0, phase = 0.0;
  for (int i = 0; i <= 10; i += 5) {
    const double g = i / 10.0;
    const auto f = noise::noisy_protocol_run(zero, zero, noise::NoiseKind::QuditFlip, noise::NoiseFactor(g));
    flip = std::max(flip, std::abs(f.fidelity_a1 - 1.0));
    const auto p = noise::noisy_protocol_run(zero, zero, noise::NoiseKind::QuditPhaseFlip, noise::NoiseFactor(g));
    phase = std::max(phase, std::abs(p.fidelity_a1 - (1.0 - 0.75 * g)));
  }
  return {"noise claims", flip <= kStructuralTol && phase <= kStructuralTol,
          fmt("qudit-flip deviation %.3e", flip) + fmt(", phase-flip deviation %.3e", phase)};
}

CheckResult optics_suite(const SuiteOptions& o) {
  bool ghz = true;
  for (std::size_t dim = 2; dim <= 8; ++dim) {
    ghz = ghz && optics::ghz_via_cnot(dim).amplitudes() == ghz_state(dim).amplitudes();
  }
  double reck = 0.0;
  for (std::size_t dim : {2, 3, 4, 8}) {
    for (int r = 0; r < 10; ++r) {
      const Eigen::MatrixXcd u = random_unitary(dim, mix_seed(o.seed, 100 * dim + static_cast<std::size_t>(r)));
      reck = std::max(reck, optics::max_deviation(optics::compose(optics::reck_decompose(u)), u));
    }
  }
  bool circuits = true;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto m = optics::compose(optics::as_network(optics::correction_circuit(k, 4), 4));
    circuits = circuits && m == correction_unitary(k, 4).matrix();
  }
  return {"optics", ghz && circuits && reck <= kStructuralTol,
          std::string(ghz ? "ghz ok" : "ghz mismatch") + (circuits ? ", circuits ok" : ", circuit mismatch") +
              fmt(", reck error %.3e", reck)};
}

CheckResult session_counts(const SuiteOptions& o) {
  const PhaseVector a = random_phases(3, mix_seed(o.seed, 501));
  const PhaseVector b = random_phases(3, mix_seed(o.seed, 502));
  auto done = session::Session::create(a, b, 3, true, o.seed);
  done.run();
  auto declined = session::Session::create(a, b, 3, false, o.seed);
  declined.run();
  const bool ok = done.status() == session::SessionStatus::Completed && done.messages().size() == 8 &&
                  declined.status() == session::SessionStatus::Aborted && declined.messages().size() == 4;
  return {"session transcripts", ok,
          std::to_string(done.messages().size()) + " / " + std::to_string(declined.messages().size()) + " messages"};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(const SuiteOptions& options) {
  return {recovery(options), decomposition(options), uniformity(),          completeness(),
          noise_claims(),    optics_suite(options),  session_counts(options)};
}

}  // namespace bcrsp::checks
