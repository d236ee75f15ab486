#include <doctest.h>

#include <array>
#include <cmath>

#include "bcrsp/noise.hpp"
#include "bcrsp/protocol.hpp"
#include "bcrsp/qudit.hpp"
#include "oracles.hpp"

using namespace bcrsp;
using oracle::Mat;
using oracle::Vec;

namespace {

StateVector sv(Dims dims, const Vec& v) { return StateVector(std::move(dims), v); }

Mat dense_channel(const Mat& rho, const KrausSet& k, const Dims& dims, std::size_t target) {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (const auto& e : k.operators()) {
    const Mat big = oracle::embed(e.matrix(), dims, target);
    out += big * rho * big.adjoint();
  }
  return out;
}

}  // namespace

TEST_CASE("tensor of basis states") {
  const StateVector s = tensor(StateVector::basis(2, 0), StateVector::basis(2, 0));
  CHECK(s.dims() == Dims{2, 2});
  CHECK(s.amplitudes().isApprox(Vec(oracle::ket(4, 0))));
}

TEST_CASE("tensor is linear in the first factor") {
  const Vec plus = (oracle::ket(2, 0) + oracle::ket(2, 1)) / std::sqrt(2.0);
  const StateVector s = tensor(sv({2}, plus), StateVector::basis(2, 0));
  const Vec expected = (oracle::ket(4, 0) + oracle::ket(4, 2)) / std::sqrt(2.0);
  CHECK((s.amplitudes() - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("two qutrit GHZ factors give 729 amplitudes with 9 non-zero entries") {
  const StateVector s = tensor(ghz_state(3), ghz_state(3));
  REQUIRE(s.size() == 729);
  std::size_t idx = 0;
  for (std::size_t a1 = 0; a1 < 3; ++a1)
    for (std::size_t b1 = 0; b1 < 3; ++b1)
      for (std::size_t c1 = 0; c1 < 3; ++c1)
        for (std::size_t a2 = 0; a2 < 3; ++a2)
          for (std::size_t b2 = 0; b2 < 3; ++b2)
            for (std::size_t c2 = 0; c2 < 3; ++c2, ++idx) {
              const bool on = a1 == b1 && b1 == c1 && a2 == b2 && b2 == c2;
              CHECK(std::abs(s[idx] - Complex(on ? 1.0 / 3.0 : 0.0, 0.0)) < 1e-15);
            }
}

TEST_CASE("StateVector rejects bad input") {
  CHECK_THROWS_AS(StateVector(Dims{2, 2}, Vec(oracle::ket(3, 0))), DimensionError);
  CHECK_THROWS_AS(StateVector(Dims{2}, Vec(Vec::Ones(2))), std::invalid_argument);
  CHECK_NOTHROW(StateVector::unnormalized(Dims{2}, Vec::Ones(2)));
}

TEST_CASE("apply_on identity leaves the state unchanged") {
  oracle::Rng rng(1);
  const StateVector s = sv({3, 2, 4}, rng.state(24));
  for (std::size_t t = 0; t < 3; ++t) {
    const StateVector r = apply_on(Operator::identity(s.dims()[t]), s, t);
    CHECK(r.amplitudes() == s.amplitudes());
  }
}

TEST_CASE("U_1 on a single qutrit |1> picks up e^{i 2pi/3}") {
  const StateVector r = apply_on(correction_unitary(1, 3), StateVector::basis(3, 1), 0);
  CHECK(std::abs(r[1] - std::polar(1.0, 2.0 * oracle::kPi / 3.0)) < 1e-15);
  CHECK(std::abs(r[0]) == 0.0);
  CHECK(std::abs(r[2]) == 0.0);
}

TEST_CASE("U_1 maps the collapsed qutrit state back to the target") {
  const double d1 = 0.37, d2 = -1.9;
  // |x_1> as printed: (|0> + e^{i 4pi/3} e^{i d1}|1> + e^{i 2pi/3} e^{i d2}|2>)/sqrt3.
  const Vec x1 = oracle::equal_amplitude({0.0, 4 * oracle::kPi / 3 + d1, 2 * oracle::kPi / 3 + d2});
  const Vec chi = oracle::equal_amplitude({0.0, d1, d2});
  const StateVector r = apply_on(correction_unitary(1, 3), sv({3}, x1), 0);
  CHECK(oracle::phase_free_distance(r.amplitudes(), chi) < 1e-12);
}

TEST_CASE("apply_on agrees with the Kronecker embedding") {
  oracle::Rng rng(2);
  const Dims dims{2, 3, 4};
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector s = sv(dims, rng.state(24));
    for (std::size_t t = 0; t < 3; ++t) {
      const Mat u = rng.unitary(dims[t]);
      const Vec expected = oracle::embed(u, dims, t) * s.amplitudes();
      const StateVector got = apply_on(Operator::unitary(u), s, t);
      CHECK((got.amplitudes() - expected).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(std::abs(got.norm() - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("apply_on with two targets in either order") {
  oracle::Rng rng(3);
  const Dims dims{2, 3, 2};
  const StateVector s = sv(dims, rng.state(12));
  const Mat u = rng.unitary(4);  // acts on subsystems (0, 2)
  // Oracle: permute to (0, 2, 1), apply u (x) I, permute back.
  Vec expected(12);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 2; ++c) {
        Complex acc = 0.0;
        for (std::size_t a2 = 0; a2 < 2; ++a2)
          for (std::size_t c2 = 0; c2 < 2; ++c2)
            acc += u(static_cast<Eigen::Index>(a * 2 + c), static_cast<Eigen::Index>(a2 * 2 + c2)) *
                   s[a2 * 6 + b * 2 + c2];
        expected[static_cast<Eigen::Index>(a * 6 + b * 2 + c)] = acc;
      }
  const std::array<std::size_t, 2> t02{0, 2};
  CHECK((apply_on(Operator::unitary(u), s, t02).amplitudes() - expected).cwiseAbs().maxCoeff() < 1e-12);

  // Swapping the target order swaps the operator's tensor factors.
  Mat swap = Mat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) swap(j * 2 + i, i * 2 + j) = 1.0;
  const std::array<std::size_t, 2> t20{2, 0};
  const Mat swapped = swap * u * swap;
  CHECK((apply_on(Operator::unitary(swapped), s, t20).amplitudes() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("apply_on rejects mismatched operators") {
  const StateVector s = ghz_state(3);
  CHECK_THROWS_AS(apply_on(Operator::identity(2), s, 0), DimensionError);
  CHECK_THROWS_AS(apply_on(Operator::identity(3), s, 5), DimensionError);
}

TEST_CASE("project |00> onto |0>") {
  const Projection p = project(StateVector::basis(Dims{2, 2}, std::array<std::size_t, 2>{0, 0}),
                               StateVector::basis(2, 0), 0);
  CHECK(p.probability == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(p.post_state);
  CHECK(p.post_state->dims() == Dims{2});
  CHECK(std::abs((*p.post_state)[0] - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("project a qutrit GHZ state onto the zeroth Fourier vector") {
  const Vec tau0 = Vec::Ones(3) / std::sqrt(3.0);
  const Vec remainder = (oracle::ket(9, 0) + oracle::ket(9, 4) + oracle::ket(9, 8)) / std::sqrt(3.0);
  for (std::size_t t = 0; t < 3; ++t) {
    const Projection p = project(ghz_state(3), sv({3}, tau0), t);
    CHECK(std::abs(p.probability - 1.0 / 3.0) < 1e-12);
    REQUIRE(p.post_state);
    CHECK(oracle::phase_free_distance(p.post_state->amplitudes(), remainder) < 1e-12);
  }
}

TEST_CASE("zero-probability projection yields no post state") {
  const Projection p = project(StateVector::basis(2, 0), StateVector::basis(2, 1), 0);
  CHECK(p.probability == 0.0);
  CHECK_FALSE(p.post_state);
}

TEST_CASE("sequential projections on A2 and B1 leave the printed four-particle state") {
  const double d1 = 0.4, d2 = 1.3, e1 = -0.8, e2 = 2.2;  // d: Alice, e: Bob
  const PhaseVector alice({d1, d2});
  const PhaseVector bob({e1, e2});
  const double p = 2 * oracle::kPi / 3;
  const auto x = [&](std::size_t i) { return oracle::equal_amplitude({0.0, -p * i + d1, -2 * p * i + d2}); };
  const auto xt = [&](std::size_t i) { return oracle::equal_amplitude({0.0, -p * i + e1, -2 * p * i + e2}); };
  const auto f = [&](std::size_t k) { return oracle::equal_amplitude({0.0, p * k, 2 * p * k}); };
  const Vec b2c2 = oracle::kron(x(1), f(0)) + oracle::kron(x(2), f(1)) + oracle::kron(x(0), f(2));

  const auto collapse = [&](std::size_t bob_outcome) {
    StateVector s = channel_state(3);
    s = *project(s, sender_basis(alice)[1], 3).post_state;  // A2
    s = *project(s, sender_basis(bob)[bob_outcome], 1).post_state;  // B1
    REQUIRE(s.dims() == Dims{3, 3, 3, 3});  // A1, C1, B2, C2
    return s;
  };

  SUBCASE("printed state: A1 side x~2 f0 + x~0 f1 + x~1 f2, Bob on his third basis vector") {
    const Vec a1c1 = oracle::kron(xt(2), f(0)) + oracle::kron(xt(0), f(1)) + oracle::kron(xt(1), f(2));
    CHECK(oracle::phase_free_distance(collapse(2).amplitudes(), oracle::kron(a1c1, b2c2).normalized()) < 1e-10);
  }
  SUBCASE("Bob on his second basis vector: A1 side shifts by one, consistent with the projected state that follows") {
    const Vec a1c1 = oracle::kron(xt(1), f(0)) + oracle::kron(xt(2), f(1)) + oracle::kron(xt(0), f(2));
    CHECK(oracle::phase_free_distance(collapse(1).amplitudes(), oracle::kron(a1c1, b2c2).normalized()) < 1e-10);
  }
}

TEST_CASE("measure |0> in the computational basis") {
  std::vector<StateVector> comp;
  for (std::size_t j = 0; j < 3; ++j) comp.push_back(StateVector::basis(3, j));
  const MeasurementBasis basis(comp);
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(measure(StateVector::basis(3, 0), basis, 0, seed).outcome == 0);
}

TEST_CASE("Born frequencies of a GHZ qutrit in the Fourier basis") {
  const MeasurementBasis f = fourier_basis(3);
  const StateVector g = ghz_state(3);
  const int trials = 100000;
  std::array<int, 3> counts{};
  for (int t = 0; t < trials; ++t) ++counts[measure(g, f, 1, mix_seed(99, static_cast<std::uint64_t>(t))).outcome];
  const double sigma = std::sqrt(trials * (1.0 / 3.0) * (2.0 / 3.0));
  for (int c : counts) CHECK(std::abs(c - trials / 3.0) < 3 * sigma);
}

TEST_CASE("fixed seed replays the same outcomes") {
  const MeasurementBasis f = fourier_basis(4);
  const StateVector g = ghz_state(4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = measure(g, f, 0, seed);
    const auto b = measure(g, f, 0, seed);
    CHECK(a.outcome == b.outcome);
    CHECK(a.post_state.amplitudes() == b.post_state.amplitudes());
  }
}

TEST_CASE("measurement completeness over random bases") {
  oracle::Rng rng(4);
  for (std::size_t n : {2, 3, 4, 5}) {
    const Mat u = rng.unitary(n);
    std::vector<StateVector> vs;
    for (std::size_t k = 0; k < n; ++k) vs.push_back(sv({n}, u.col(static_cast<Eigen::Index>(k))));
    const MeasurementBasis basis(vs);
    const StateVector s = sv({n, 2}, rng.state(2 * n));
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += project(s, basis[k], 0).probability;
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("MeasurementBasis rejects non-orthonormal families") {
  CHECK_THROWS_AS(MeasurementBasis({StateVector::basis(2, 0), StateVector::basis(2, 0)}), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementBasis({StateVector::basis(3, 0), StateVector::basis(3, 1)}), std::invalid_argument);
}

TEST_CASE("Operator::unitary rejects non-unitary matrices") {
  Mat m = Mat::Identity(2, 2);
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(Operator::unitary(m), std::invalid_argument);
}

TEST_CASE("apply_kraus with the identity channel") {
  oracle::Rng rng(5);
  const BranchEnsemble e = BranchEnsemble::pure(sv({3, 3}, rng.state(9)));
  const BranchEnsemble r = apply_kraus(e, KrausSet(3, {Operator::identity(3)}), 1);
  REQUIRE(r.size() == 1);
  CHECK(r.branches()[0].state.amplitudes() == e.branches()[0].state.amplitudes());
  CHECK(r.branches()[0].weight == 1.0);
}

TEST_CASE("qudit flip with zero noise leaves the ensemble unchanged") {
  oracle::Rng rng(6);
  const BranchEnsemble e = BranchEnsemble::pure(sv({4}, rng.state(4)));
  const BranchEnsemble r = apply_kraus(e, noise::qudit_flip_kraus(noise::NoiseFactor(0.0), 4), 0);
  REQUIRE(r.size() == 1);
  CHECK((r.branches()[0].state.amplitudes() - e.branches()[0].state.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("dephasing scales the coherences of an equal superposition") {
  const double g = 0.3;
  const Vec plus = Vec::Ones(4) / 2.0;
  const BranchEnsemble r =
      apply_kraus(BranchEnsemble::pure(sv({4}, plus)), noise::dephasing_kraus(noise::NoiseFactor(g), 4), 0);
  const Mat rho = r.density_matrix();
  const Mat rho0 = plus * plus.adjoint();
  // Dense oracle: sum_l E_l rho E_l^dagger with the coefficients written out.
  Mat e0 = Mat::Zero(4, 4);
  e0(0, 0) = 1.0;
  for (int j = 1; j < 4; ++j) e0(j, j) = std::sqrt(1 - g);
  Mat expected = e0 * rho0 * e0.adjoint();
  for (int s = 1; s < 4; ++s) {
    Mat es = Mat::Zero(4, 4);
    es(s, s) = std::sqrt(g);
    expected += es * rho0 * es.adjoint();
  }
  CHECK((rho - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(rho(0, 1) - 0.25 * std::sqrt(1 - g)) < 1e-12);
  CHECK(std::abs(rho(1, 2) - 0.25 * (1 - g)) < 1e-12);
}

TEST_CASE("ensemble evolution matches dense density matrices") {
  oracle::Rng rng(7);
  for (std::size_t n : {2, 3, 4}) {
    for (auto kind : {noise::NoiseKind::QuditFlip, noise::NoiseKind::Dephasing, noise::NoiseKind::QuditPhaseFlip}) {
      const Dims dims{n, n};
      const Vec psi = rng.state(n * n);
      const double g = rng.uniform();
      const KrausSet k = noise::kraus_for(kind, noise::NoiseFactor(g), n);
      for (std::size_t t = 0; t < 2; ++t) {
        const BranchEnsemble r = apply_kraus(BranchEnsemble::pure(sv(dims, psi)), k, t);
        const Mat expected = dense_channel(psi * psi.adjoint(), k, dims, t);
        CHECK((r.density_matrix() - expected).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("apply_kraus preserves total weight") {
  oracle::Rng rng(8);
  const BranchEnsemble e = BranchEnsemble::pure(sv({4, 4}, rng.state(16)));
  for (auto kind : {noise::NoiseKind::QuditFlip, noise::NoiseKind::Dephasing, noise::NoiseKind::QuditPhaseFlip}) {
    for (int i = 0; i < 20; ++i) {
      const KrausSet k = noise::kraus_for(kind, noise::NoiseFactor(i / 19.0), 4);
      const BranchEnsemble r = apply_kraus(apply_kraus(e, k, 0), k, 1);
      CHECK(std::abs(r.total_weight() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("KrausSet rejects incomplete sets") {
  Mat half = Mat::Identity(2, 2) * std::sqrt(0.5);
  CHECK_THROWS_AS(KrausSet(2, {Operator(half)}), std::invalid_argument);
  CHECK_NOTHROW(KrausSet(2, {Operator(half), Operator(half)}));
}

TEST_CASE("fidelity basics") {
  oracle::Rng rng(9);
  const StateVector psi = sv({3}, rng.state(3));
  CHECK(std::abs(fidelity(psi, BranchEnsemble::pure(psi)) - 1.0) < 1e-12);
  CHECK(fidelity(StateVector::basis(2, 0), BranchEnsemble::pure(StateVector::basis(2, 1))) == 0.0);
  CHECK_THROWS_AS(fidelity(StateVector::basis(2, 0), BranchEnsemble::pure(StateVector::basis(3, 1))), DimensionError);
}

TEST_CASE("equal-superposition qudit under phase-flip noise at 0.4") {
  // Every non-identity operator maps |+> to a state orthogonal to it, so the
  // overlap <+|rho|+> is the identity weight 1 - 3(0.4)/4 = 0.7.
  const StateVector plus = equatorial_state(PhaseVector::zero(4));
  const BranchEnsemble r =
      apply_kraus(BranchEnsemble::pure(plus), noise::phase_flip_kraus(noise::NoiseFactor(0.4), 4), 0);
  const double f = fidelity(plus, r);
  CHECK(std::abs(f * f - 0.7) < 1e-12);
  CHECK(std::abs(f - std::sqrt(0.7)) < 1e-12);
}

TEST_CASE("fidelity squared is linear under mixing") {
  oracle::Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const StateVector psi = sv({3}, rng.state(3));
    const StateVector a = sv({3}, rng.state(3));
    const StateVector b = sv({3}, rng.state(3));
    const double lambda = rng.uniform();
    const BranchEnsemble mix({{lambda, a}, {1 - lambda, b}});
    const double fa = fidelity(psi, BranchEnsemble::pure(a));
    const double fb = fidelity(psi, BranchEnsemble::pure(b));
    const double fm = fidelity(psi, mix);
    CHECK(std::abs(fm * fm - (lambda * fa * fa + (1 - lambda) * fb * fb)) < 1e-12);
  }
}

TEST_CASE("BranchEnsemble validation") {
  CHECK_THROWS_AS(BranchEnsemble({}), std::invalid_argument);
  CHECK_THROWS_AS(BranchEnsemble({{0.5, StateVector::basis(2, 0)}}), std::invalid_argument);
  CHECK_THROWS_AS(BranchEnsemble({{1.5, StateVector::basis(2, 0)}, {-0.5, StateVector::basis(2, 1)}}),
                  std::invalid_argument);
}

TEST_CASE("from_density reproduces the density matrix") {
  oracle::Rng rng(11);
  const Vec a = rng.state(3), b = rng.state(3);
  const Mat rho = 0.3 * a * a.adjoint() + 0.7 * b * b.adjoint();
  const BranchEnsemble e = BranchEnsemble::from_density(Dims{3}, rho);
  CHECK(e.size() <= 2);
  CHECK((e.density_matrix() - rho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reduce_to traces out the other subsystems") {
  oracle::Rng rng(12);
  const Dims dims{2, 3};
  const Vec psi = rng.state(6);
  // Oracle: rho_B = sum_a <a|psi><psi|a>.
  Mat expected = Mat::Zero(3, 3);
  for (int a = 0; a < 2; ++a) {
    const Vec part = psi.segment(a * 3, 3);
    expected += part * part.adjoint();
  }
  CHECK((reduce_to(sv(dims, psi), 1).density_matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("root_of_unity is exact on equal residues") {
  CHECK(root_of_unity(5, 4) == root_of_unity(1, 4));
  CHECK(root_of_unity(-3, 4) == root_of_unity(1, 4));
  CHECK(root_of_unity(0, 7) == Complex(1.0, 0.0));
}
