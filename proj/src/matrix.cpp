#include "mondrian/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace mondrian {

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::without_row_col(std::size_t k) const {
  Matrix out(rows_ - 1, cols_ - 1);
  for (std::size_t i = 0, oi = 0; i < rows_; ++i) {
    if (i == k) continue;
    for (std::size_t j = 0, oj = 0; j < cols_; ++j) {
      if (j == k) continue;
      out(oi, oj) = (*this)(i, j);
      ++oj;
    }
    ++oi;
  }
  return out;
}

void Matrix::remove_column(std::size_t j) {
  if (j >= cols_) throw std::invalid_argument("remove_column: index out of range");
  std::size_t w = 0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t c = 0; c < cols_; ++c) {
      if (c == j) continue;
      a_[w++] = a_[i * cols_ + c];
    }
  a_.resize(w);
  cols_ -= 1;
}

void Matrix::append_column(std::span<const double> col) {
  if (col.size() != rows_) throw std::invalid_argument("append_column: length mismatch");
  std::vector<double> next(rows_ * (cols_ + 1));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t c = 0; c < cols_; ++c) next[i * (cols_ + 1) + c] = a_[i * cols_ + c];
    next[i * (cols_ + 1) + cols_] = col[i];
  }
  a_ = std::move(next);
  cols_ += 1;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    const auto row = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += row[j] * xi;
  }
  return y;
}

namespace {

template <bool Parallel>
Matrix gram_impl(const Matrix& a) {
  const std::size_t n = a.cols();
  Matrix g(n, n);
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) acc += a(r, i) * a(r, j);
      g(i, j) = acc;
      g(j, i) = acc;
    }
  }
  return g;
}

}  // namespace

Matrix gram(const Matrix& a) { return gram_impl<true>(a); }
Matrix gram_serial(const Matrix& a) { return gram_impl<false>(a); }

Matrix gram_rows(const Matrix& a, std::span<const int> rows) {
  const std::size_t n = a.cols();
  Matrix g(n, n);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (const int r : rows) acc += a(r, i) * a(r, j);
      g(i, j) = acc;
      g(j, i) = acc;
    }
  }
  return g;
}

Matrix cholesky(const Matrix& spd) {
  const std::size_t n = spd.rows();
  if (spd.cols() != n) throw std::invalid_argument("cholesky: matrix must be square");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) throw std::runtime_error("cholesky: matrix not positive definite");
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      l(i, j) = acc / ljj;
    }
  }
  return l;
}

std::vector<double> cholesky_solve(const Matrix& chol, std::span<const double> b) {
  const std::size_t n = chol.rows();
  std::vector<double> x(b.begin(), b.end());
  // Forward: L z = b
  for (std::size_t i = 0; i < n; ++i) {
    double acc = x[i];
    for (std::size_t k = 0; k < i; ++k) acc -= chol(i, k) * x[k];
    x[i] = acc / chol(i, i);
  }
  // Backward: L^T x = z
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) acc -= chol(k, ii) * x[k];
    x[ii] = acc / chol(ii, ii);
  }
  return x;
}

Matrix spd_inverse(const Matrix& spd) {
  const std::size_t n = spd.rows();
  const Matrix l = cholesky(spd);
  Matrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const std::vector<double> col = cholesky_solve(l, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    e[j] = 0.0;
  }
  // Round-off can leave a tiny asymmetry; the true inverse is symmetric.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return inv;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace mondrian
