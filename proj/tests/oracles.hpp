#pragma once

// Reference computations for the tests, written independently of the
// library's index arithmetic: dense Kronecker products and full-space
// density matrices.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bcrsp/qudit.hpp"

namespace oracle {

using bcrsp::Complex;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

/// I (x) ... (x) op (x) ... (x) I with op at position `target`.
inline Mat embed(const Mat& op, const std::vector<std::size_t>& dims, std::size_t target) {
  Mat out = Mat::Identity(1, 1);
  for (std::size_t s = 0; s < dims.size(); ++s) {
    const auto d = static_cast<Eigen::Index>(dims[s]);
    out = kron(out, s == target ? op : Mat(Mat::Identity(d, d)));
  }
  return out;
}

/// e^{i 2 pi r / n}, computed directly.
inline Complex w(long long r, std::size_t n) {
  return std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(n));
}

inline Vec ket(std::size_t dim, std::size_t j) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(j)] = 1.0;
  return v;
}

/// (1/sqrt N) (|0> + sum_j e^{i(extra_j + theta_j)} |j>) from explicit phase lists.
inline Vec equal_amplitude(const std::vector<double>& phases) {
  Vec v(static_cast<Eigen::Index>(phases.size()));
  for (std::size_t j = 0; j < phases.size(); ++j) v[static_cast<Eigen::Index>(j)] = std::polar(1.0, phases[j]);
  return v / std::sqrt(static_cast<double>(phases.size()));
}

/// Largest |a_i - c b_i| after the best global phase c.
inline double phase_free_distance(const Vec& a, const Vec& b) {
  const Complex ov = b.dot(a);  // <b|a>
  const Complex c = std::abs(ov) > 0 ? ov / std::abs(ov) : Complex(1.0, 0.0);
  return (a - c * b).cwiseAbs().maxCoeff();
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }

  std::vector<double> phases(std::size_t dim) {
    std::vector<double> p(dim - 1);
    for (auto& x : p) x = uniform(0.0, 2.0 * kPi);
    return p;
  }
  Vec state(std::size_t size) {
    Vec v(static_cast<Eigen::Index>(size));
    for (auto& x : v) x = Complex(normal(), normal());
    return v.normalized();
  }
  /// Haar-distributed unitary via QR with the phase fix on R's diagonal.
  Mat unitary(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    Mat g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) g(i, j) = Complex(normal(), normal());
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
      const Complex d = r(j, j);
      q.col(j) *= std::abs(d) > 0 ? d / std::abs(d) : Complex(1.0, 0.0);
    }
    return q;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace oracle
