#include "i2lt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "i2lt/errors.hpp"

namespace i2lt::linalg {

namespace {

// Pairs whose normalized inner product falls below this are treated as orthogonal.
constexpr double kOrthogonalityTol = 1e-15;
// Columns shorter than this fraction of the input's Frobenius norm are rounding
// noise; rotating them against anything never settles.
constexpr double kNegligibleColumn = 1e-17;

void rotate(std::span<double> a, std::span<double> b, double c, double s) {
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = a[k];
    const double y = b[k];
    a[k] = c * x - s * y;
    b[k] = s * x + c * y;
  }
}

// Adds unit columns orthogonal to the first `filled` columns of `u` (stored
// as rows of `ut`) until all rows are populated.
void complete_orthonormal(DenseMatrix& ut, std::size_t filled) {
  const std::size_t n = ut.cols();
  std::vector<double> candidate(n);
  for (std::size_t slot = filled; slot < ut.rows(); ++slot) {
    double best_norm = -1.0;
    std::vector<double> best;
    for (std::size_t e = 0; e < n; ++e) {
      std::fill(candidate.begin(), candidate.end(), 0.0);
      candidate[e] = 1.0;
      // Two passes of classical Gram-Schmidt.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < slot; ++k) {
          auto q = ut.row(k);
          const double proj = dot(q, candidate);
          for (std::size_t t = 0; t < n; ++t) candidate[t] -= proj * q[t];
        }
      }
      const double nrm = std::sqrt(dot(candidate, candidate));
      if (nrm > best_norm) {
        best_norm = nrm;
        best = candidate;
      }
      if (best_norm > 0.5) break;
    }
    auto dst = ut.row(slot);
    for (std::size_t t = 0; t < n; ++t) dst[t] = best[t] / best_norm;
  }
}

// Requires m.rows() >= m.cols().
SvdResult jacobi_tall(const DenseMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  // Row i of `work` is column i of the evolving A*V; row i of `vt` is column i of V.
  DenseMatrix work = m.transposed();
  DenseMatrix vt = DenseMatrix::identity(cols);

  const double floor_sq = std::pow(kNegligibleColumn * frobenius_norm(m), 2);
  const std::size_t max_sweeps = 30 * std::max<std::size_t>(cols, 1);
  bool converged = false;
  for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < cols; ++i) {
      for (std::size_t j = i + 1; j < cols; ++j) {
        auto wi = work.row(i);
        auto wj = work.row(j);
        const double alpha = dot(wi, wi);
        const double beta = dot(wj, wj);
        const double gamma = dot(wi, wj);
        if (alpha <= floor_sq || beta <= floor_sq) continue;
        if (gamma == 0.0 || std::abs(gamma) <= kOrthogonalityTol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate(wi, wj, c, s);
        rotate(vt.row(i), vt.row(j), c, s);
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw NumericalError("svd: Jacobi sweeps did not converge within " + std::to_string(max_sweeps) + " sweeps");
  }

  std::vector<double> norms(cols);
  for (std::size_t i = 0; i < cols; ++i) {
    const double sq = dot(work.row(i), work.row(i));
    norms[i] = sq > floor_sq ? std::sqrt(sq) : 0.0;
  }
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

  SvdResult out;
  out.sigma.resize(cols);
  DenseMatrix ut(cols, rows);
  DenseMatrix vsorted(cols, cols);
  std::size_t nonzero = 0;
  for (std::size_t k = 0; k < cols; ++k) {
    const std::size_t src = order[k];
    out.sigma[k] = norms[src];
    std::copy(vt.row(src).begin(), vt.row(src).end(), vsorted.row(k).begin());
    if (norms[src] > 0.0) {
      auto dst = ut.row(k);
      auto w = work.row(src);
      for (std::size_t t = 0; t < rows; ++t) dst[t] = w[t] / norms[src];
      ++nonzero;
    }
  }
  complete_orthonormal(ut, nonzero);
  out.U = ut.transposed();
  out.V = vsorted.transposed();
  return out;
}

}  // namespace

DenseMatrix SvdResult::reconstruct() const {
  DenseMatrix scaled = U;
  for (std::size_t i = 0; i < scaled.rows(); ++i)
    for (std::size_t k = 0; k < sigma.size(); ++k) scaled(i, k) *= sigma[k];
  return multiply_a_bt(scaled, V);
}

SvdResult svd(const DenseMatrix& m) {
  if (!m.all_finite()) throw NumericalError("svd: input contains non-finite entries");
  if (m.rows() >= m.cols()) return jacobi_tall(m);
  SvdResult t = jacobi_tall(m.transposed());
  std::swap(t.U, t.V);
  return t;
}

double trace_norm(const DenseMatrix& m) {
  const auto s = svd(m).sigma;
  return std::accumulate(s.begin(), s.end(), 0.0);
}

std::size_t numerical_rank(const std::vector<double>& sigma, double relative_cutoff) {
  if (sigma.empty()) return 0;
  const double top = *std::max_element(sigma.begin(), sigma.end());
  if (top <= 0.0) return 0;
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > relative_cutoff * top; }));
}

std::size_t numerical_rank(const DenseMatrix& m, double relative_cutoff) {
  return numerical_rank(svd(m).sigma, relative_cutoff);
}

ThresholdResult svt_detailed(const DenseMatrix& m, double threshold) {
  if (!(threshold >= 0.0)) {
    throw std::invalid_argument("svt: threshold must be non-negative, got " + std::to_string(threshold));
  }
  SvdResult d = svd(m);
  ThresholdResult out;
  out.value = DenseMatrix(m.rows(), m.cols());
  std::vector<double> shrunk;
  for (std::size_t k = 0; k < d.sigma.size(); ++k) {
    const double s = d.sigma[k] - threshold;
    if (s <= 0.0) break;
    shrunk.push_back(s);
    out.trace_norm += s;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double us = d.U(i, k) * s;
      if (us == 0.0) continue;
      auto dst = out.value.row(i);
      for (std::size_t j = 0; j < m.cols(); ++j) dst[j] += us * d.V(j, k);
    }
  }
  out.rank = numerical_rank(shrunk);
  return out;
}

DenseMatrix svt(const DenseMatrix& m, double threshold) { return svt_detailed(m, threshold).value; }

}  // namespace i2lt::linalg
