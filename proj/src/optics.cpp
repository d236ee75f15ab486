#include "bcrsp/optics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

namespace bcrsp::optics {

namespace {

constexpr double kPi = std::numbers::pi;

struct Block {
  Complex a, b, c, d;  // rows (lo, hi) x cols (lo, hi)
};

Block block_of(const BeamSplitter& bs) {
  const Complex e = unit_phase(bs.phi);
  const double s = std::sin(bs.omega);
  const double c = std::cos(bs.omega);
  return {e * s, e * c, Complex(c, 0.0), Complex(-s, 0.0)};
}

std::pair<std::size_t, std::size_t> ordered_modes(const BeamSplitter& bs, std::size_t dim) {
  if (bs.m == bs.n) throw std::invalid_argument("beam splitter needs two distinct modes");
  if (bs.m >= dim || bs.n >= dim) throw std::invalid_argument("beam splitter mode out of range");
  return {std::min(bs.m, bs.n), std::max(bs.m, bs.n)};
}

// M <- E M, touching only the affected rows.
void left_apply(Eigen::MatrixXcd& mat, const Element& el, std::size_t dim) {
  if (const auto* ps = std::get_if<PhaseShifter>(&el)) {
    if (ps->mode >= dim) throw std::invalid_argument("phase shifter mode out of range");
    mat.row(static_cast<Eigen::Index>(ps->mode)) *= unit_phase(ps->theta);
    return;
  }
  const auto& bs = std::get<BeamSplitter>(el);
  const auto [lo, hi] = ordered_modes(bs, dim);
  const Block k = block_of(bs);
  const auto rl = static_cast<Eigen::Index>(lo);
  const auto rh = static_cast<Eigen::Index>(hi);
  const Eigen::RowVectorXcd top = mat.row(rl);
  const Eigen::RowVectorXcd bottom = mat.row(rh);
  mat.row(rl) = k.a * top + k.b * bottom;
  mat.row(rh) = k.c * top + k.d * bottom;
}

}  // namespace

std::size_t InterferometerNetwork::beam_splitter_count() const {
  std::size_t c = 0;
  for (const auto& e : elements) c += std::holds_alternative<BeamSplitter>(e) ? 1 : 0;
  return c;
}

std::size_t InterferometerNetwork::phase_shifter_count() const {
  return elements.size() - beam_splitter_count();
}

Operator cnot_gate(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("cnot_gate: dimension must be at least 2");
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i * n + (i + j) % n, i * n + j) = 1.0;
  return Operator::unitary(std::move(m));
}

StateVector bell_state(std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("bell_state: dimension must be at least 2");
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n * n);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Eigen::Index j = 0; j < n; ++j) v[j * n + j] = amp;
  return StateVector(Dims{dim, dim}, std::move(v));
}

StateVector ghz_via_cnot(std::size_t dim) {
  const StateVector start = tensor(bell_state(dim), StateVector::basis(dim, 0));
  const std::array<std::size_t, 2> targets = {1, 2};
  return apply_on(cnot_gate(dim), start, targets);
}

Operator bs_matrix(const BeamSplitter& bs, std::size_t dim) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  left_apply(m, bs, dim);
  return Operator(std::move(m));
}

Operator ps_matrix(const PhaseShifter& ps, std::size_t dim) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  left_apply(m, ps, dim);
  return Operator(std::move(m));
}

Eigen::MatrixXcd compose(const InterferometerNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.dim);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
  for (const auto& e : net.elements) left_apply(m, e, net.dim);
  return m;
}

double max_deviation(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_deviation: shape mismatch");
  return (a - b).cwiseAbs().maxCoeff();
}

InterferometerNetwork reck_decompose(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols()) throw DimensionError("reck_decompose: matrix must be square");
  const auto dim = static_cast<std::size_t>(u.rows());
  if (dim < 1 || dim > kMaxReckDim) {
    throw std::invalid_argument("reck_decompose: dimension must be between 1 and " + std::to_string(kMaxReckDim));
  }
  if (unitarity_defect(u) > kStructuralTol) throw std::invalid_argument("reck_decompose: matrix is not unitary");

  // Null the lower triangle with T^dagger from the left; what remains is diagonal.
  Eigen::MatrixXcd w = u;
  std::vector<BeamSplitter> nulling;
  for (std::size_t c = 0; c + 1 < dim; ++c) {
    for (std::size_t m = dim - 1; m > c; --m) {
      const Complex xn = w(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
      const Complex xm = w(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c));
      BeamSplitter bs{m, c, std::atan2(std::abs(xn), std::abs(xm)), std::arg(xn) - std::arg(xm)};
      const Eigen::MatrixXcd t = bs_matrix(bs, dim).matrix();
      w = t.adjoint() * w;
      nulling.push_back(bs);
    }
  }

  InterferometerNetwork net{dim, {}};
  for (std::size_t j = 0; j < dim; ++j) {
    const double theta = std::arg(w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
    if (theta != 0.0) net.elements.emplace_back(PhaseShifter{j, theta});
  }
  for (auto it = nulling.rbegin(); it != nulling.rend(); ++it) net.elements.emplace_back(*it);
  return net;
}

Eigen::MatrixXcd fourier_matrix(std::size_t dim) { return fourier_basis(dim).as_rows(); }

PaperNetworkReport paper_network_4d() {
  // Printed path labels are 1-based: T_43 mixes paths 4 and 3, i.e. modes 3 and 2.
  const double th01 = std::atan(-1.0 / 3.0);
  InterferometerNetwork net{4, {
      BeamSplitter{3, 2, kPi / 4, kPi / 2},
      BeamSplitter{3, 1, std::atan(std::sqrt(2.0)), kPi},
      BeamSplitter{3, 0, kPi / 3, 3 * kPi / 2},
      BeamSplitter{2, 1, std::atan(std::sqrt(6.0 / 10.0)), std::atan(-2.0)},
      BeamSplitter{2, 0, kPi / 4, std::atan(-std::sqrt(2.0))},
      BeamSplitter{1, 0, std::atan(-2.0), kPi / 4},
      PhaseShifter{0, th01},
      PhaseShifter{1, th01},
      PhaseShifter{2, kPi / 4},
      PhaseShifter{3, kPi / 2},
  }};
  PaperNetworkReport r;
  r.composed = compose(net);
  r.target = fourier_matrix(4);
  r.deviation = max_deviation(r.composed, r.target);
  const Complex overlap = (r.target.adjoint() * r.composed).trace();
  const Complex align = std::abs(overlap) > 0.0 ? std::conj(overlap) / std::abs(overlap) : Complex(1.0, 0.0);
  r.deviation_up_to_phase = max_deviation(align * r.composed, r.target);
  r.unitarity_defect = unitarity_defect(r.composed);
  r.network = std::move(net);
  return r;
}

InterferometerNetwork sender_network(const PhaseVector& p) {
  const std::size_t dim = p.dim();
  InterferometerNetwork net{dim, {}};
  for (std::size_t j = 1; j < dim; ++j) {
    if (p.theta(j) != 0.0) net.elements.emplace_back(PhaseShifter{j, -p.theta(j)});
  }
  const InterferometerNetwork f = reck_decompose(fourier_matrix(dim));
  net.elements.insert(net.elements.end(), f.elements.begin(), f.elements.end());
  return net;
}

std::vector<PhaseShifter> correction_circuit(std::size_t k, std::size_t dim) {
  if (dim < 2) throw std::invalid_argument("correction_circuit: dimension must be at least 2");
  if (k >= dim) throw std::invalid_argument("correction_circuit: index out of range");
  std::vector<PhaseShifter> out;
  for (std::size_t j = 1; j < dim; ++j) {
    const std::size_t r = (j * k) % dim;
    if (r == 0) continue;
    out.push_back({j, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(dim)});
  }
  return out;
}

InterferometerNetwork as_network(const std::vector<PhaseShifter>& shifters, std::size_t dim) {
  InterferometerNetwork net{dim, {}};
  for (const auto& s : shifters) net.elements.emplace_back(s);
  return net;
}

std::string network_to_json(const InterferometerNetwork& net, int indent) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : net.elements) {
    nlohmann::ordered_json j;
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
      j["kind"] = "bs";
      j["modes"] = {std::min(bs->m, bs->n), std::max(bs->m, bs->n)};
      j["omega"] = bs->omega;
      j["phi"] = bs->phi;
    } else {
      const auto& ps = std::get<PhaseShifter>(e);
      j["kind"] = "ps";
      j["modes"] = {ps.mode};
      j["theta"] = ps.theta;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(indent);
}

}  // namespace bcrsp::optics
