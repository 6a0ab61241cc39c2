#pragma once

#include <cstddef>
#include <vector>

#include "i2lt/matrix.hpp"

namespace i2lt::linalg {

/// Thin singular value decomposition M = U diag(sigma) V'.
///
/// For an r x c input, U is r x k and V is c x k with k = min(r, c); both
/// have orthonormal columns (columns for zero singular values are completed
/// to an orthonormal set). sigma is non-increasing and non-negative.
struct SvdResult {
  DenseMatrix U;
  std::vector<double> sigma;
  DenseMatrix V;

  DenseMatrix reconstruct() const;
};

/// One-sided Jacobi SVD. Throws NumericalError when the input is non-finite
/// or the rotation sweeps fail to converge within 30 * min(rows, cols) sweeps.
SvdResult svd(const DenseMatrix& m);

/// Sum of singular values.
double trace_norm(const DenseMatrix& m);

/// Number of singular values above `relative_cutoff` times the largest one.
std::size_t numerical_rank(const DenseMatrix& m, double relative_cutoff = 1e-10);
std::size_t numerical_rank(const std::vector<double>& sigma, double relative_cutoff = 1e-10);

struct ThresholdResult {
  DenseMatrix value;
  /// Trace norm of `value`, i.e. the sum of the shrunk singular values.
  double trace_norm = 0.0;
  std::size_t rank = 0;
};

/// Singular value thresholding: the proximal operator of threshold * ||.||_*.
/// Throws std::invalid_argument for a negative threshold.
DenseMatrix svt(const DenseMatrix& m, double threshold);
ThresholdResult svt_detailed(const DenseMatrix& m, double threshold);

}  // namespace i2lt::linalg
