#pragma once

#include <span>
#include <vector>

#include "mondrian/matrix.hpp"

namespace mondrian {

/// Minimizer of delta^2 ||theta||^2 + ||y - Z theta||^2, computed by a direct
/// solve of the normal equations (never by explicit inversion).
std::vector<double> solve_ridge_primal(const Matrix& z, std::span<const double> y,
                                       double delta);

/// Same vector via the N x N system theta = X^T (X X^T + delta^2 I)^{-1} y.
std::vector<double> solve_ridge_dual(const Matrix& x, std::span<const double> y,
                                     double delta);

/// Gram matrix of the Laplace kernel k(x, x') = exp(-sum_d lambda_d |x_d - x'_d|).
Matrix laplace_gram(const Matrix& x, std::span<const double> lifetimes);
Matrix laplace_gram_serial(const Matrix& x, std::span<const double> lifetimes);

/// Cross-kernel matrix K(a_i, b_j) for two point sets.
Matrix laplace_cross(const Matrix& a, const Matrix& b, std::span<const double> lifetimes);

/// Exact kernel ridge regressor; the factorization of (K + delta^2 I) and the
/// weight vector are cached so predictions cost O(N) each.
class KernelRidge {
 public:
  KernelRidge(const Matrix& k, std::span<const double> y, double delta);

  double predict(std::span<const double> k_star) const;

 private:
  std::vector<double> weights_;  // (K + delta^2 I)^{-1} y
};

double kernel_ridge_predict(const Matrix& k, std::span<const double> k_star,
                            std::span<const double> y, double delta);

/**
 * Maintained inverse of C = Z^T Z + delta^2 I under column edits of Z,
 * expressed through three O(C^2) primitives: a rank-1 update, deletion of a
 * row/column pair, and bordering by a new row/column pair.
 *
 * The tracked matrix is transiently non-symmetric inside composite edits,
 * so symmetrization is a separate step invoked by callers once symmetry is
 * restored. Denominators below 1e-12 in magnitude raise, never regularize:
 * the path algorithms guarantee positive definiteness when delta > 0, so a
 * trip means a logic bug upstream.
 */
class RegularizedInverse {
 public:
  RegularizedInverse() = default;
  RegularizedInverse(Matrix inverse, double delta2)
      : inv_(std::move(inverse)), delta2_(delta2) {}

  /// Build from the tracked Z restricted to the given rows: (Z^T Z + delta^2 I)^{-1}.
  static RegularizedInverse from_features(const Matrix& z, std::span<const int> rows,
                                          double delta);

  std::size_t dim() const { return inv_.rows(); }
  const Matrix& matrix() const { return inv_; }
  double delta2() const { return delta2_; }

  /// inv(A + u v^T) from inv(A); requires |1 + v^T inv u| > 1e-12.
  void rank1_update(std::span<const double> u, std::span<const double> v);

  /// inv of A with row/col i deleted; requires |inv(i,i)| > 1e-12.
  void delete_row_col(std::size_t i);

  /// inv of [[A, b], [c^T, d]]; requires Schur complement |d - c^T inv b| > 1e-12.
  void extend_row_col(std::span<const double> b, std::span<const double> c, double d);

  /// Average away round-off asymmetry; call only when the tracked matrix is
  /// symmetric.
  void symmetrize();

  /// Incremental updates applied since the last refresh.
  std::size_t updates_since_refresh() const { return updates_; }
  bool needs_refresh() const { return updates_ >= kRefreshInterval; }

  /// Recompute from scratch to shed accumulated drift.
  void refresh(const Matrix& z, std::span<const int> rows);

  static constexpr std::size_t kRefreshInterval = 512;

 private:
  Matrix inv_;
  double delta2_ = 0.0;
  std::size_t updates_ = 0;
};

}  // namespace mondrian
