#pragma once

// Dense state-vector machinery for small multi-qudit registers.
//
// Subsystem 0 is the most significant digit of the flat amplitude index, so
// the amplitude of |i_0 i_1 ... i_{k-1}> lives at
//   i_0 * d_1*...*d_{k-1} + i_1 * d_2*...*d_{k-1} + ... + i_{k-1}.
// Every value type here is immutable after construction.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bcrsp {

using Complex = std::complex<double>;
using Dims = std::vector<std::size_t>;

// Tolerance for structural checks (norms, orthonormality, unitarity).
inline constexpr double kStructuralTol = 1e-10;
// Tolerance for probability-weight and trace sums.
inline constexpr double kWeightTol = 1e-12;
// Squared norms at or below this are treated as an impossible outcome.
inline constexpr double kZeroProbability = 1e-24;
// Eigenvalues of a density matrix at or below this are rounding noise.
inline constexpr double kEigenvalueFloor = 1e-14;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::size_t product(const Dims& dims);

/// e^{i theta}
Complex unit_phase(double theta);

/// e^{i 2 pi r / n} with r reduced mod n first, so equal residues give
/// bit-identical values.
Complex root_of_unity(long long r, std::size_t n);

class StateVector {
 public:
  /// Throws DimensionError on a length mismatch and std::invalid_argument if
  /// the amplitudes are not unit-norm within kStructuralTol.
  StateVector(Dims dims, Eigen::VectorXcd amplitudes);

  /// Intermediate construction: skips the norm check.
  static StateVector unnormalized(Dims dims, Eigen::VectorXcd amplitudes);

  /// Computational basis state |digits>.
  static StateVector basis(const Dims& dims, std::span<const std::size_t> digits);
  static StateVector basis(std::size_t dim, std::size_t index);

  const Dims& dims() const { return dims_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  std::size_t size() const { return static_cast<std::size_t>(amps_.size()); }
  std::size_t subsystems() const { return dims_.size(); }
  Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }

  double norm() const { return amps_.norm(); }
  bool is_normalized() const;
  StateVector normalized() const;

 private:
  StateVector(Dims dims, Eigen::VectorXcd amplitudes, bool check_norm);

  Dims dims_;
  Eigen::VectorXcd amps_;
};

/// <a|b>
Complex inner(const StateVector& a, const StateVector& b);

/// |<a|b>| = 1 within kStructuralTol.
bool same_up_to_phase(const StateVector& a, const StateVector& b, double tol = kStructuralTol);

/// Largest entrywise deviation between a and b after rotating b onto a's
/// global phase. Both are normalized first.
double phase_aligned_deviation(const StateVector& a, const StateVector& b);

class Operator {
 public:
  /// General linear map C^{dim_in} -> C^{dim_out}.
  explicit Operator(Eigen::MatrixXcd entries);

  /// Unitary-flagged construction; throws std::invalid_argument when
  /// ||U^dagger U - I||_max > kStructuralTol.
  static Operator unitary(Eigen::MatrixXcd entries);
  static Operator identity(std::size_t dim);

  std::size_t dim_in() const { return static_cast<std::size_t>(m_.cols()); }
  std::size_t dim_out() const { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  bool is_unitary_flagged() const { return unitary_; }

  Operator operator*(const Operator& rhs) const;
  Operator adjoint() const;

 private:
  Eigen::MatrixXcd m_;
  bool unitary_ = false;
};

/// ||U^dagger U - I||_max
double unitarity_defect(const Eigen::MatrixXcd& u);

class MeasurementBasis {
 public:
  /// Throws std::invalid_argument if the vectors are not orthonormal within
  /// kStructuralTol or do not span the full dimension.
  explicit MeasurementBasis(std::vector<StateVector> vectors);

  std::size_t dim() const { return vectors_.size(); }
  const StateVector& operator[](std::size_t k) const { return vectors_[k]; }
  const std::vector<StateVector>& vectors() const { return vectors_; }

  /// Row k holds the coordinates of vector k.
  Eigen::MatrixXcd as_rows() const;
  /// Unitary mapping vector k to |k>, i.e. rows are conjugated coordinates.
  Operator analyzer() const;

 private:
  std::vector<StateVector> vectors_;
};

struct Branch {
  double weight;
  StateVector state;
};

class BranchEnsemble {
 public:
  /// Throws std::invalid_argument on an empty list, negative weights,
  /// mismatched dims, or a weight sum more than kStructuralTol away from 1.
  explicit BranchEnsemble(std::vector<Branch> branches);
  static BranchEnsemble pure(StateVector state);

  /// Spectral decomposition of a density matrix on `dims`. Eigenvalues at or
  /// below kEigenvalueFloor are dropped.
  static BranchEnsemble from_density(const Dims& dims, const Eigen::MatrixXcd& rho);

  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }
  const Dims& dims() const { return branches_.front().state.dims(); }
  double total_weight() const;

  /// Dense sum_b w_b |psi_b><psi_b|. Only sensible for small registers.
  Eigen::MatrixXcd density_matrix() const;

 private:
  std::vector<Branch> branches_;
};

StateVector tensor(const StateVector& a, const StateVector& b);

/// Applies a square operator to the subsystems listed in `targets`; the
/// operator's index runs over the targets in the order given.
StateVector apply_on(const Operator& op, const StateVector& state,
                     std::span<const std::size_t> targets);
StateVector apply_on(const Operator& op, const StateVector& state, std::size_t target);

/// (<v|_target (x) I) |state>, unnormalized, with the target removed.
StateVector contract(const StateVector& state, const StateVector& basis_vec, std::size_t target);

struct Projection {
  double probability;
  // Empty when the outcome has zero probability.
  std::optional<StateVector> post_state;
};

Projection project(const StateVector& state, const StateVector& basis_vec, std::size_t target);

struct MeasurementOutcome {
  std::size_t outcome;
  StateVector post_state;
};

/// Born-rule sampling of a projective measurement. The same seed always
/// selects the same outcome for the same state.
MeasurementOutcome measure(const StateVector& state, const MeasurementBasis& basis,
                           std::size_t target, std::uint64_t rng_seed);

/// Uniform double in [0, 1) from a 64-bit seed; identical on every platform.
double uniform_from_seed(std::uint64_t seed);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

class KrausSet {
 public:
  /// Throws std::invalid_argument when ||sum E^dagger E - I||_max exceeds
  /// kStructuralTol, or operators are not dim x dim.
  KrausSet(std::size_t dim, std::vector<Operator> operators);

  std::size_t dim() const { return dim_; }
  const std::vector<Operator>& operators() const { return ops_; }
  std::size_t size() const { return ops_.size(); }
  double completeness_defect() const;

 private:
  std::size_t dim_;
  std::vector<Operator> ops_;
};

double completeness_defect(std::size_t dim, const std::vector<Operator>& operators);

/// One branch per (input branch, Kraus operator) with the weight multiplied
/// by the squared post-norm. Branches whose weight vanishes are pruned.
BranchEnsemble apply_kraus(const BranchEnsemble& ens, const KrausSet& kraus, std::size_t target);

/// sqrt(sum_b w_b |<target|psi_b>|^2)
double fidelity(const StateVector& target, const BranchEnsemble& ens);

/// Partial trace onto one subsystem, as an ensemble over computational-basis
/// outcomes of every other subsystem.
BranchEnsemble reduce_to(const StateVector& state, std::size_t keep);

}  // namespace bcrsp
