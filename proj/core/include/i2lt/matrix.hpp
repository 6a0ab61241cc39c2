#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace i2lt {

using FeatureVector = std::vector<double>;

/// Dense row-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> diag);
  static DenseMatrix diagonal(std::size_t rows, std::size_t cols, std::span<const double> diag);
  /// Stacks equally sized vectors as rows. `cols` is used when `rows` is empty.
  static DenseMatrix from_rows(std::span<const FeatureVector> rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<double> entries() noexcept { return data_; }
  std::span<const double> entries() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  DenseMatrix transposed() const;
  bool all_finite() const noexcept;

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s) noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(DenseMatrix a, double s);
DenseMatrix operator*(double s, DenseMatrix a);

/// a * b
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
/// a' * b
DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b);
/// a * b'
DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b);
FeatureVector multiply(const DenseMatrix& a, std::span<const double> x);

double frobenius_norm(const DenseMatrix& a);
/// Sum of elementwise products, <a, b>_F.
double frobenius_inner(const DenseMatrix& a, const DenseMatrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
/// x' S z without materializing S z.
double bilinear(std::span<const double> x, const DenseMatrix& s, std::span<const double> z);

}  // namespace i2lt
