#include "mondrian/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace mondrian {
namespace {

constexpr double kSingularTol = 1e-12;

void require_delta(double delta) {
  if (!(delta > 0.0))
    throw std::invalid_argument("ridge: delta must be > 0 (the regularized matrix "
                                "could be singular otherwise)");
}

void require_lifetimes(std::span<const double> lifetimes) {
  for (const double l : lifetimes)
    if (!(l >= 0.0)) throw std::invalid_argument("laplace kernel: lifetimes must be >= 0");
}

double laplace_entry(std::span<const double> a, std::span<const double> b,
                     std::span<const double> lifetimes) {
  double s = 0.0;
  for (std::size_t d = 0; d < lifetimes.size(); ++d) s += lifetimes[d] * std::abs(a[d] - b[d]);
  return std::exp(-s);
}

}  // namespace

std::vector<double> solve_ridge_primal(const Matrix& z, std::span<const double> y,
                                       double delta) {
  require_delta(delta);
  Matrix normal = gram(z);
  for (std::size_t i = 0; i < normal.rows(); ++i) normal(i, i) += delta * delta;
  const Matrix l = cholesky(normal);
  const std::vector<double> rhs = matvec_transposed(z, y);
  return cholesky_solve(l, rhs);
}

std::vector<double> solve_ridge_dual(const Matrix& x, std::span<const double> y,
                                     double delta) {
  require_delta(delta);
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t d = 0; d < x.cols(); ++d) acc += x(i, d) * x(j, d);
      k(i, j) = acc;
      k(j, i) = acc;
    }
  for (std::size_t i = 0; i < n; ++i) k(i, i) += delta * delta;
  const std::vector<double> alpha = cholesky_solve(cholesky(k), y);
  return matvec_transposed(x, alpha);
}

namespace {

template <bool Parallel>
Matrix laplace_gram_impl(const Matrix& x, std::span<const double> lifetimes) {
  require_lifetimes(lifetimes);
  const std::size_t n = x.rows();
  Matrix k(n, n);
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = laplace_entry(x.row(i), x.row(j), lifetimes);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace

Matrix laplace_gram(const Matrix& x, std::span<const double> lifetimes) {
  return laplace_gram_impl<true>(x, lifetimes);
}

Matrix laplace_gram_serial(const Matrix& x, std::span<const double> lifetimes) {
  return laplace_gram_impl<false>(x, lifetimes);
}

Matrix laplace_cross(const Matrix& a, const Matrix& b, std::span<const double> lifetimes) {
  require_lifetimes(lifetimes);
  Matrix k(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      k(i, j) = laplace_entry(a.row(i), b.row(j), lifetimes);
  return k;
}

KernelRidge::KernelRidge(const Matrix& k, std::span<const double> y, double delta) {
  require_delta(delta);
  for (const double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("kernel ridge: non-finite target");
  Matrix reg = k;
  for (std::size_t i = 0; i < reg.rows(); ++i) reg(i, i) += delta * delta;
  weights_ = cholesky_solve(cholesky(reg), y);
}

double KernelRidge::predict(std::span<const double> k_star) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) acc += k_star[i] * weights_[i];
  return acc;
}

double kernel_ridge_predict(const Matrix& k, std::span<const double> k_star,
                            std::span<const double> y, double delta) {
  return KernelRidge(k, y, delta).predict(k_star);
}

RegularizedInverse RegularizedInverse::from_features(const Matrix& z,
                                                     std::span<const int> rows,
                                                     double delta) {
  require_delta(delta);
  Matrix c = gram_rows(z, rows);
  for (std::size_t i = 0; i < c.rows(); ++i) c(i, i) += delta * delta;
  return RegularizedInverse(spd_inverse(c), delta * delta);
}

void RegularizedInverse::rank1_update(std::span<const double> u, std::span<const double> v) {
  const std::size_t n = dim();
  // p = inv u, q^T = v^T inv
  std::vector<double> p(n, 0.0), q(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += inv_(i, j) * u[j];
    p[i] = acc;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += v[i] * inv_(i, j);
    q[j] = acc;
  }
  double denom = 1.0;
  for (std::size_t i = 0; i < n; ++i) denom += v[i] * p[i];
  if (std::abs(denom) <= kSingularTol)
    throw std::runtime_error("rank1_update: singular update (1 + v^T A^-1 u ~ 0)");
  const double scale = 1.0 / denom;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = p[i] * scale;
    if (pi == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) inv_(i, j) -= pi * q[j];
  }
  ++updates_;
}

void RegularizedInverse::delete_row_col(std::size_t i) {
  const std::size_t n = dim();
  if (i >= n) throw std::invalid_argument("delete_row_col: index out of range");
  const double h = inv_(i, i);
  if (std::abs(h) <= kSingularTol)
    throw std::runtime_error("delete_row_col: cannot delete, pivot ~ 0");
  // E - f g^T / h, with E, f, g read off the current inverse.
  Matrix out(n - 1, n - 1);
  for (std::size_t r = 0, orow = 0; r < n; ++r) {
    if (r == i) continue;
    const double fr = inv_(r, i);
    for (std::size_t c = 0, ocol = 0; c < n; ++c) {
      if (c == i) continue;
      out(orow, ocol) = inv_(r, c) - fr * inv_(i, c) / h;
      ++ocol;
    }
    ++orow;
  }
  inv_ = std::move(out);
  ++updates_;
}

void RegularizedInverse::extend_row_col(std::span<const double> b, std::span<const double> c,
                                        double d) {
  const std::size_t n = dim();
  std::vector<double> ainv_b(n, 0.0), ct_ainv(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += inv_(i, j) * b[j];
    ainv_b[i] = acc;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += c[i] * inv_(i, j);
    ct_ainv[j] = acc;
  }
  double s = d;
  for (std::size_t i = 0; i < n; ++i) s -= c[i] * ainv_b[i];
  if (std::abs(s) <= kSingularTol)
    throw std::runtime_error("extend_row_col: singular extension (Schur complement ~ 0)");
  const double h = 1.0 / s;

  Matrix out(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = ainv_b[i] * h;
    for (std::size_t j = 0; j < n; ++j) out(i, j) = inv_(i, j) + fi * ct_ainv[j];
    out(i, n) = -fi;
  }
  for (std::size_t j = 0; j < n; ++j) out(n, j) = -h * ct_ainv[j];
  out(n, n) = h;
  inv_ = std::move(out);
  ++updates_;
}

void RegularizedInverse::symmetrize() {
  for (std::size_t i = 0; i < dim(); ++i)
    for (std::size_t j = i + 1; j < dim(); ++j) {
      const double s = 0.5 * (inv_(i, j) + inv_(j, i));
      inv_(i, j) = s;
      inv_(j, i) = s;
    }
}

void RegularizedInverse::refresh(const Matrix& z, std::span<const int> rows) {
  Matrix c = gram_rows(z, rows);
  for (std::size_t i = 0; i < c.rows(); ++i) c(i, i) += delta2_;
  inv_ = spd_inverse(c);
  updates_ = 0;
}

}  // namespace mondrian
