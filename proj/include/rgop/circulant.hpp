#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace rgop {

/// First row c_0..c_{T-1} of a circulant matrix circ(c). Row i of the matrix is
/// the first row cyclically shifted right by i.
class CirculantVector {
 public:
  explicit CirculantVector(Eigen::VectorXd first_row);

  const Eigen::VectorXd& first_row() const noexcept { return first_row_; }
  Eigen::Index size() const noexcept { return first_row_.size(); }

  /// True iff c_t == c_{T-t} for t = 1..T-1, i.e. the matrix is symmetric.
  bool symmetric() const noexcept { return symmetric_; }

 private:
  Eigen::VectorXd first_row_;
  bool symmetric_;
};

/// Lengths above this threshold use the FFT path in eigenvalues_symmetric.
inline constexpr Eigen::Index kDirectEigenvalueLimit = 256;

/// lambda_j = sum_t c_t cos(2 pi j t / T), j = 0..T-1. Throws NotSymmetric.
Eigen::VectorXd eigenvalues_symmetric(const CirculantVector& c);

/// Direct O(T^2) cosine sums regardless of length. Exposed so the FFT path can
/// be checked against it.
Eigen::VectorXd eigenvalues_symmetric_direct(const CirculantVector& c);
Eigen::VectorXd eigenvalues_symmetric_fft(const CirculantVector& c);

Eigen::MatrixXd materialize(const CirculantVector& c);

/// True iff min_j lambda_j >= -tol * max(1, max_j |lambda_j|). Throws NotSymmetric.
bool is_psd(const CirculantVector& c, double tol);

/// sum_{t=0}^{T-1} cos(2 pi j t / T); exactly T when j = 0, zero otherwise.
double cosine_sum(long j, long horizon);

}  // namespace rgop
