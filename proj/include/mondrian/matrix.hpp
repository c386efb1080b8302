#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mondrian {

/// Dense row-major matrix of doubles. Deliberately small: the feature
/// dimension C stays moderate by construction, so no sparse or blocked
/// formats are needed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {a_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }

  std::vector<double>& data() { return a_; }
  const std::vector<double>& data() const { return a_; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Matrix transposed() const;

  /// Remove row i and column i (square matrices).
  Matrix without_row_col(std::size_t i) const;

  /// Drop column j; later columns shift left. O(rows * cols).
  void remove_column(std::size_t j);

  /// Append a column on the right.
  void append_column(std::span<const double> col);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

/// y = A x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

/// y = A^T x
std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> x);

/// A^T A (OpenMP over output rows; exploits symmetry).
Matrix gram(const Matrix& a);
Matrix gram_serial(const Matrix& a);

/// A^T A restricted to a subset of A's rows.
Matrix gram_rows(const Matrix& a, std::span<const int> rows);

/// In-place lower-triangular Cholesky factor of an SPD matrix.
/// Throws std::runtime_error if the matrix is not positive definite.
Matrix cholesky(const Matrix& spd);

/// Solve L L^T x = b given the Cholesky factor L.
std::vector<double> cholesky_solve(const Matrix& chol, std::span<const double> b);

/// Inverse of an SPD matrix via its Cholesky factor.
Matrix spd_inverse(const Matrix& spd);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace mondrian
