#include "bcrsp/qudit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace bcrsp {

namespace {

Dims strides_of(const Dims& dims) {
  Dims s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

void require_index(std::size_t target, const Dims& dims, const char* what) {
  if (target >= dims.size()) {
    throw DimensionError(std::string(what) + ": subsystem index " + std::to_string(target) +
                         " out of range for " + std::to_string(dims.size()) + " subsystems");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::size_t product(const Dims& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

Complex unit_phase(double theta) { return std::polar(1.0, theta); }

Complex root_of_unity(long long r, std::size_t n) {
  const auto nn = static_cast<long long>(n);
  const long long reduced = ((r % nn) + nn) % nn;
  if (reduced == 0) return {1.0, 0.0};
  return unit_phase(2.0 * std::numbers::pi * static_cast<double>(reduced) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(Dims dims, Eigen::VectorXcd amplitudes)
    : StateVector(std::move(dims), std::move(amplitudes), true) {}

StateVector::StateVector(Dims dims, Eigen::VectorXcd amplitudes, bool check_norm)
    : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
  for (auto d : dims_) {
    if (d == 0) throw DimensionError("StateVector: zero subsystem dimension");
  }
  if (static_cast<std::size_t>(amps_.size()) != product(dims_)) {
    throw DimensionError("StateVector: " + std::to_string(amps_.size()) +
                         " amplitudes for dimension product " + std::to_string(product(dims_)));
  }
  if (check_norm && !is_normalized()) {
    throw std::invalid_argument("StateVector: amplitudes not normalized (norm " +
                                std::to_string(amps_.norm()) + ")");
  }
}

StateVector StateVector::unnormalized(Dims dims, Eigen::VectorXcd amplitudes) {
  return StateVector(std::move(dims), std::move(amplitudes), false);
}

StateVector StateVector::basis(const Dims& dims, std::span<const std::size_t> digits) {
  if (digits.size() != dims.size()) throw DimensionError("basis: digit count mismatch");
  const Dims strides = strides_of(dims);
  std::size_t index = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (digits[i] >= dims[i]) throw DimensionError("basis: digit out of range");
    index += digits[i] * strides[i];
  }
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(product(dims)));
  a[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector(dims, std::move(a));
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  const std::size_t digit[] = {index};
  return basis(Dims{dim}, digit);
}

bool StateVector::is_normalized() const { return std::abs(amps_.norm() - 1.0) <= kStructuralTol; }

StateVector StateVector::normalized() const {
  const double n = amps_.norm();
  if (n <= 0.0) throw std::invalid_argument("StateVector: cannot normalize the zero vector");
  return StateVector(dims_, amps_ / n);
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.dims() != b.dims()) throw DimensionError("inner: dimension mismatch");
  return a.amplitudes().dot(b.amplitudes());  // Eigen's dot conjugates the left side
}

bool same_up_to_phase(const StateVector& a, const StateVector& b, double tol) {
  if (a.dims() != b.dims()) return false;
  const double overlap = std::abs(inner(a, b)) / (a.norm() * b.norm());
  return std::abs(overlap - 1.0) <= tol;
}

double phase_aligned_deviation(const StateVector& a, const StateVector& b) {
  if (a.dims() != b.dims()) throw DimensionError("phase_aligned_deviation: dimension mismatch");
  const Eigen::VectorXcd x = a.amplitudes() / a.norm();
  Eigen::VectorXcd y = b.amplitudes() / b.norm();
  const Complex ov = x.dot(y);
  if (std::abs(ov) > 0.0) y *= std::conj(ov) / std::abs(ov);
  return (x - y).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(Eigen::MatrixXcd entries) : m_(std::move(entries)) {
  if (m_.rows() == 0 || m_.cols() == 0) throw DimensionError("Operator: empty matrix");
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXcd d =
      u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return d.cwiseAbs().maxCoeff();
}

Operator Operator::unitary(Eigen::MatrixXcd entries) {
  const double defect = unitarity_defect(entries);
  if (!(defect <= kStructuralTol)) {
    throw std::invalid_argument("Operator: matrix is not unitary (defect " +
                                std::to_string(defect) + ")");
  }
  Operator op(std::move(entries));
  op.unitary_ = true;
  return op;
}

Operator Operator::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return unitary(Eigen::MatrixXcd::Identity(n, n));
}

Operator Operator::operator*(const Operator& rhs) const {
  if (dim_in() != rhs.dim_out()) throw DimensionError("Operator product: dimension mismatch");
  Operator out(m_ * rhs.m_);
  out.unitary_ = unitary_ && rhs.unitary_;
  return out;
}

Operator Operator::adjoint() const {
  Operator out(m_.adjoint());
  out.unitary_ = unitary_;
  return out;
}

// ---------------------------------------------------------------------------
// MeasurementBasis

MeasurementBasis::MeasurementBasis(std::vector<StateVector> vectors) : vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw std::invalid_argument("MeasurementBasis: no vectors");
  const std::size_t n = vectors_.size();
  for (const auto& v : vectors_) {
    if (v.dims() != Dims{n}) {
      throw DimensionError("MeasurementBasis: need " + std::to_string(n) +
                           " vectors on a single " + std::to_string(n) + "-level system");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (std::abs(inner(vectors_[i], vectors_[j]) - expected) > kStructuralTol) {
        throw std::invalid_argument("MeasurementBasis: vectors not orthonormal");
      }
    }
  }
}

Eigen::MatrixXcd MeasurementBasis::as_rows() const {
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m.row(k) = vectors_[static_cast<std::size_t>(k)].amplitudes().transpose();
  return m;
}

Operator MeasurementBasis::analyzer() const { return Operator::unitary(as_rows().conjugate()); }

// ---------------------------------------------------------------------------
// BranchEnsemble

BranchEnsemble::BranchEnsemble(std::vector<Branch> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) throw std::invalid_argument("BranchEnsemble: no branches");
  const Dims& d = branches_.front().state.dims();
  for (const auto& b : branches_) {
    if (!(b.weight >= 0.0)) throw std::invalid_argument("BranchEnsemble: negative weight");
    if (b.state.dims() != d) throw DimensionError("BranchEnsemble: branch dims differ");
  }
  if (std::abs(total_weight() - 1.0) > kStructuralTol) {
    throw std::invalid_argument("BranchEnsemble: weights sum to " + std::to_string(total_weight()));
  }
}

BranchEnsemble BranchEnsemble::pure(StateVector state) {
  return BranchEnsemble({Branch{1.0, std::move(state)}});
}

BranchEnsemble BranchEnsemble::from_density(const Dims& dims, const Eigen::MatrixXcd& rho) {
  const auto n = static_cast<Eigen::Index>(product(dims));
  if (rho.rows() != n || rho.cols() != n) throw DimensionError("from_density: dimension mismatch");
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
  std::vector<Branch> out;
  // Largest eigenvalue first keeps the output order stable across callers.
  for (Eigen::Index k = n; k-- > 0;) {
    const double w = solver.eigenvalues()[k];
    if (w <= kEigenvalueFloor) continue;
    out.push_back({w, StateVector(dims, solver.eigenvectors().col(k).normalized())});
  }
  return BranchEnsemble(std::move(out));
}

double BranchEnsemble::total_weight() const {
  double s = 0.0;
  for (const auto& b : branches_) s += b.weight;
  return s;
}

Eigen::MatrixXcd BranchEnsemble::density_matrix() const {
  const auto n = static_cast<Eigen::Index>(branches_.front().state.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& b : branches_) {
    const auto& a = b.state.amplitudes();
    rho.noalias() += b.weight * (a * a.adjoint());
  }
  return rho;
}

// ---------------------------------------------------------------------------
// Operations

StateVector tensor(const StateVector& a, const StateVector& b) {
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  Eigen::VectorXcd out(na * nb);
  for (Eigen::Index i = 0; i < na; ++i) out.segment(i * nb, nb) = a.amplitudes()[i] * b.amplitudes();
  return StateVector::unnormalized(std::move(dims), std::move(out));
}

StateVector apply_on(const Operator& op, const StateVector& state,
                     std::span<const std::size_t> targets) {
  const Dims& dims = state.dims();
  if (targets.empty()) throw DimensionError("apply_on: no targets");
  std::size_t block = 1;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    require_index(targets[i], dims, "apply_on");
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[j] == targets[i]) throw DimensionError("apply_on: repeated target");
    }
    block *= dims[targets[i]];
  }
  if (op.dim_in() != block || op.dim_out() != block) {
    throw DimensionError("apply_on: operator is " + std::to_string(op.dim_out()) + "x" +
                         std::to_string(op.dim_in()) + " but targets span " + std::to_string(block));
  }

  const Dims strides = strides_of(dims);
  // Offsets of each target-digit combination, first target most significant.
  std::vector<std::size_t> offsets(block, 0);
  {
    std::size_t repeat = block;
    for (auto t : targets) {
      repeat /= dims[t];
      for (std::size_t c = 0; c < block; ++c) offsets[c] += ((c / repeat) % dims[t]) * strides[t];
    }
  }

  const std::size_t total = state.size();
  const Eigen::VectorXcd& in = state.amplitudes();
  Eigen::VectorXcd out(in.size());
  Eigen::VectorXcd gathered(static_cast<Eigen::Index>(block));
  Eigen::VectorXcd mapped(static_cast<Eigen::Index>(block));
  const Eigen::MatrixXcd& m = op.matrix();
  for (std::size_t base = 0; base < total; ++base) {
    bool is_base = true;
    for (auto t : targets) {
      if ((base / strides[t]) % dims[t] != 0) {
        is_base = false;
        break;
      }
    }
    if (!is_base) continue;
    for (std::size_t c = 0; c < block; ++c) gathered[static_cast<Eigen::Index>(c)] = in[static_cast<Eigen::Index>(base + offsets[c])];
    mapped.noalias() = m * gathered;
    for (std::size_t c = 0; c < block; ++c) out[static_cast<Eigen::Index>(base + offsets[c])] = mapped[static_cast<Eigen::Index>(c)];
  }
  return StateVector::unnormalized(dims, std::move(out));
}

StateVector apply_on(const Operator& op, const StateVector& state, std::size_t target) {
  const Dims& dims = state.dims();
  require_index(target, dims, "apply_on");
  const std::size_t d = dims[target];
  if (op.dim_in() != d || op.dim_out() != d) {
    const std::size_t t[] = {target};
    return apply_on(op, state, t);  // reports the mismatch
  }
  // Each outer slice is a d x low row-major block; viewed column-major it is
  // low x d, so the update is block * op^T.
  const auto low = static_cast<Eigen::Index>(strides_of(dims)[target]);
  const auto span = low * static_cast<Eigen::Index>(d);
  const Eigen::MatrixXcd mt = op.matrix().transpose();
  Eigen::VectorXcd out(state.amplitudes().size());
  for (Eigen::Index base = 0; base < out.size(); base += span) {
    Eigen::Map<const Eigen::MatrixXcd> in_block(state.amplitudes().data() + base, low, static_cast<Eigen::Index>(d));
    Eigen::Map<Eigen::MatrixXcd> out_block(out.data() + base, low, static_cast<Eigen::Index>(d));
    out_block.noalias() = in_block * mt;
  }
  return StateVector::unnormalized(dims, std::move(out));
}

StateVector contract(const StateVector& state, const StateVector& basis_vec, std::size_t target) {
  const Dims& dims = state.dims();
  require_index(target, dims, "contract");
  if (basis_vec.dims() != Dims{dims[target]}) {
    throw DimensionError("contract: basis vector dimension " + std::to_string(basis_vec.size()) +
                         " does not match subsystem dimension " + std::to_string(dims[target]));
  }
  const Dims strides = strides_of(dims);
  const std::size_t d = dims[target];
  const std::size_t low = strides[target];
  Dims rest = dims;
  rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(target));
  const std::size_t n_out = state.size() / d;
  const Eigen::VectorXcd bra = basis_vec.amplitudes().conjugate();
  const Eigen::VectorXcd& in = state.amplitudes();
  Eigen::VectorXcd out(static_cast<Eigen::Index>(n_out));
  for (std::size_t o = 0; o < n_out; ++o) {
    const std::size_t base = (o / low) * d * low + o % low;
    Complex acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += bra[static_cast<Eigen::Index>(j)] * in[static_cast<Eigen::Index>(base + j * low)];
    out[static_cast<Eigen::Index>(o)] = acc;
  }
  return StateVector::unnormalized(std::move(rest), std::move(out));
}

Projection project(const StateVector& state, const StateVector& basis_vec, std::size_t target) {
  StateVector raw = contract(state, basis_vec, target);
  const double p = raw.amplitudes().squaredNorm();
  if (p <= kZeroProbability) return {p, std::nullopt};
  return {p, StateVector(raw.dims(), raw.amplitudes() / std::sqrt(p))};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

double uniform_from_seed(std::uint64_t seed) {
  return static_cast<double>(splitmix64(seed) >> 11) * 0x1.0p-53;
}

MeasurementOutcome measure(const StateVector& state, const MeasurementBasis& basis,
                           std::size_t target, std::uint64_t rng_seed) {
  require_index(target, state.dims(), "measure");
  if (basis.dim() != state.dims()[target]) throw DimensionError("measure: basis dimension mismatch");
  std::vector<Projection> branches;
  branches.reserve(basis.dim());
  double total = 0.0;
  for (const auto& v : basis.vectors()) {
    branches.push_back(project(state, v, target));
    total += branches.back().probability;
  }
  const double u = uniform_from_seed(rng_seed) * total;
  double cumulative = 0.0;
  std::size_t chosen = branches.size();
  for (std::size_t k = 0; k < branches.size(); ++k) {
    if (!branches[k].post_state) continue;
    chosen = k;  // last possible outcome absorbs rounding at the top end
    cumulative += branches[k].probability;
    if (u < cumulative) break;
  }
  if (chosen == branches.size()) throw std::logic_error("measure: every outcome has zero probability");
  return {chosen, *branches[chosen].post_state};
}

// ---------------------------------------------------------------------------
// Kraus channels

double completeness_defect(std::size_t dim, const std::vector<Operator>& operators) {
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& e : operators) acc.noalias() += e.matrix().adjoint() * e.matrix();
  return (acc - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
}

KrausSet::KrausSet(std::size_t dim, std::vector<Operator> operators)
    : dim_(dim), ops_(std::move(operators)) {
  if (ops_.empty()) throw std::invalid_argument("KrausSet: no operators");
  for (const auto& e : ops_) {
    if (e.dim_in() != dim_ || e.dim_out() != dim_) throw DimensionError("KrausSet: operator shape mismatch");
  }
  const double defect = completeness_defect();
  if (!(defect <= kStructuralTol)) {
    throw std::invalid_argument("KrausSet: completeness violated (defect " + std::to_string(defect) + ")");
  }
}

double KrausSet::completeness_defect() const { return bcrsp::completeness_defect(dim_, ops_); }

BranchEnsemble apply_kraus(const BranchEnsemble& ens, const KrausSet& kraus, std::size_t target) {
  require_index(target, ens.dims(), "apply_kraus");
  if (ens.dims()[target] != kraus.dim()) throw DimensionError("apply_kraus: Kraus dimension mismatch");
  std::vector<Branch> out;
  out.reserve(ens.size() * kraus.size());
  for (const auto& b : ens.branches()) {
    for (const auto& e : kraus.operators()) {
      StateVector next = apply_on(e, b.state, target);
      const double p = next.amplitudes().squaredNorm();
      if (p <= kZeroProbability) continue;
      out.push_back({b.weight * p, StateVector(next.dims(), next.amplitudes() / std::sqrt(p))});
    }
  }
  return BranchEnsemble(std::move(out));
}

double fidelity(const StateVector& target, const BranchEnsemble& ens) {
  if (target.dims() != ens.dims()) throw DimensionError("fidelity: dimension mismatch");
  double acc = 0.0;
  for (const auto& b : ens.branches()) acc += b.weight * std::norm(inner(target, b.state));
  return std::clamp(std::sqrt(acc), 0.0, 1.0);
}

BranchEnsemble reduce_to(const StateVector& state, std::size_t keep) {
  const Dims& dims = state.dims();
  require_index(keep, dims, "reduce_to");
  const Dims strides = strides_of(dims);
  const std::size_t d = dims[keep];
  const std::size_t low = strides[keep];
  const std::size_t others = state.size() / d;
  const double total = state.amplitudes().squaredNorm();
  std::vector<Branch> out;
  for (std::size_t o = 0; o < others; ++o) {
    const std::size_t base = (o / low) * d * low + o % low;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) v[static_cast<Eigen::Index>(j)] = state.amplitudes()[static_cast<Eigen::Index>(base + j * low)];
    const double p = v.squaredNorm();
    if (p <= kZeroProbability) continue;
    out.push_back({p / total, StateVector(Dims{d}, v / std::sqrt(p))});
  }
  return BranchEnsemble(std::move(out));
}

}  // namespace bcrsp
