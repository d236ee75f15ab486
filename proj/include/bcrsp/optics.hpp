#pragma once

// Linear-optics layer: a qudit is a single photon in one of N spatial modes,
// |j> == path a_j. Networks are built from two-mode variable beam splitters
// and single-mode phase shifters.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "bcrsp/protocol.hpp"
#include "bcrsp/qudit.hpp"

namespace bcrsp::optics {

/// Two-mode unitary on modes n < m. Inside the (n, m) block:
///   [ e^{i phi} sin(omega)   e^{i phi} cos(omega) ]
///   [ cos(omega)             -sin(omega)          ]
/// and identity elsewhere.
struct BeamSplitter {
  std::size_t m = 1;
  std::size_t n = 0;
  double omega = 0.0;
  double phi = 0.0;
};

struct PhaseShifter {
  std::size_t mode = 0;
  double theta = 0.0;
};

using Element = std::variant<BeamSplitter, PhaseShifter>;

/// Elements act in list order: the first element touches the photon first.
struct InterferometerNetwork {
  std::size_t dim = 0;
  std::vector<Element> elements;

  std::size_t beam_splitter_count() const;
  std::size_t phase_shifter_count() const;
};

/// |i, j> -> |i, i + j mod N> on two quNits.
Operator cnot_gate(std::size_t dim);

/// (1/sqrt N) sum_j |jj>
StateVector bell_state(std::size_t dim);

/// CNOT with the second Bell quNit as control and a |0> ancilla as target.
StateVector ghz_via_cnot(std::size_t dim);

/// Embedded N x N matrix. Throws std::invalid_argument when m == n or a mode
/// is out of range; the modes may be given in either order.
Operator bs_matrix(const BeamSplitter& bs, std::size_t dim);
Operator ps_matrix(const PhaseShifter& ps, std::size_t dim);

/// Product E_K ... E_2 E_1 of the network elements.
Eigen::MatrixXcd compose(const InterferometerNetwork& net);

inline constexpr std::size_t kMaxReckDim = 16;

/// Reck-style factorization U = T_1 T_2 ... T_K D with K = N(N-1)/2 beam
/// splitters and a diagonal D realized as phase shifters on the input modes.
/// Column c is cleared by T(m, c) for m = N-1 down to c+1. Zero phases are
/// omitted. Throws std::invalid_argument when U is not unitary within
/// kStructuralTol or N exceeds kMaxReckDim.
InterferometerNetwork reck_decompose(const Eigen::MatrixXcd& u);

/// ||a - b||_max
double max_deviation(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Rows are the Fourier basis vectors: F(k, j) = e^{i 2 pi j k / N} / sqrt N.
Eigen::MatrixXcd fourier_matrix(std::size_t dim);

struct PaperNetworkReport {
  InterferometerNetwork network;
  Eigen::MatrixXcd composed;
  Eigen::MatrixXcd target;           // fourier_matrix(4)
  double deviation = 0.0;            // entrywise max
  double deviation_up_to_phase = 0.0;  // after removing the best global phase
  double unitarity_defect = 0.0;
};

/// The six printed beam splitters T43, T42, T41, T32, T31, T21 (T43 acts
/// first) followed by the four printed output phase shifters, compared with
/// the 4D Fourier matrix.
PaperNetworkReport paper_network_4d();

/// Per-mode input shifters e^{-i theta_j} followed by the Reck network of the
/// Fourier matrix. The composed matrix is F diag(e^{-i theta_j}), whose rows
/// are the sender-basis coordinates.
InterferometerNetwork sender_network(const PhaseVector& p);

/// Shifters 2 pi (j k mod N) / N on every mode with a non-zero residue, so
/// the composed diagonal is correction_unitary(k, N). k = 0 gives no element.
std::vector<PhaseShifter> correction_circuit(std::size_t k, std::size_t dim = 4);

InterferometerNetwork as_network(const std::vector<PhaseShifter>& shifters, std::size_t dim);

/// JSON list [{"kind":"bs","modes":[n,m],"omega":..,"phi":..} |
///            {"kind":"ps","modes":[mode],"theta":..}].
std::string network_to_json(const InterferometerNetwork& net, int indent = 2);

}  // namespace bcrsp::optics
