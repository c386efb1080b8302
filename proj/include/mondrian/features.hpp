#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mondrian/forest.hpp"
#include "mondrian/linalg.hpp"
#include "mondrian/matrix.hpp"
#include "mondrian/tree.hpp"

namespace mondrian {

/// Row-index split of a dataset. Both sets must be non-empty and disjoint.
struct DataSplit {
  std::vector<int> train;
  std::vector<int> val;
};

/// Which partition cell a feature column stands for: (partition index,
/// leaf/cell id within it).
struct ColRef {
  std::int32_t owner = -1;
  std::int32_t cell = -1;
};

/**
 * Random-feature state for the Laplace-kernel approximation: the indicator
 * feature matrix Z (entries 0 or 1/sqrt(M), one non-zero per row per
 * partition block, only non-empty cells materialized), the maintained
 * inverse of (Z_train^T Z_train + delta^2 I), and column bookkeeping.
 *
 * Validation rows occupy rows of Z (they need predictions) but never enter
 * the inverse or Z^T y.
 */
struct FeatureState {
  Matrix z;  // N x C
  RegularizedInverse inv;
  std::vector<double> y;  // all N targets; train entries feed the solver
  DataSplit split;
  std::vector<ColRef> col_cell;  // column -> owning (partition, cell)
  double delta = 1.0;
  std::size_t num_partitions = 1;  // M

  std::size_t cols() const { return z.cols(); }

  /// Recompute the inverse from Z when enough incremental updates piled up.
  void refresh_if_needed();
};

struct FitResult {
  std::vector<double> theta;
  double rmse_train = 0.0;
  double rmse_val = 0.0;
};

/// PathPoint plus the feature count C at that lifetime.
struct KernelPathPoint {
  double lifetime = 0.0;
  double rmse_train = 0.0;
  double rmse_val = 0.0;
  std::size_t num_features = 0;
};

/// Build Z from tree partitions: one column per non-empty (tree, leaf) pair,
/// ordered by tree index then leaf discovery order (first data row that hits
/// the leaf). Per-tree blocks are built in parallel; the _serial variant is
/// the test reference.
FeatureState build_features(std::span<const MondrianTree> trees, const Matrix& x,
                            std::span<const double> y, DataSplit split, double delta);
FeatureState build_features_serial(std::span<const MondrianTree> trees, const Matrix& x,
                                   std::span<const double> y, DataSplit split, double delta);

/// Inner product of feature rows i and j: the fraction of partitions placing
/// the two points in the same cell. Unbiased for the Laplace kernel value.
double approx_kernel(const FeatureState& state, std::size_t i, std::size_t j);

/// Ridge solution theta = inv (Z_train^T y_train) and RMSEs of Z theta on
/// both splits. O(C^2 + C N).
FitResult fit_eval(const FeatureState& state);

/// Prediction at an arbitrary point: ridge weight of the cell the point
/// falls into, summed over partitions (cells with no data contribute 0).
double kernel_predict(const FeatureState& state, std::span<const MondrianTree> trees,
                      std::span<const double> theta, std::span<const double> point);

/**
 * Revert one cut by merging the sibling feature columns it created. Columns
 * i < j must be the pair belonging to the youngest remaining cut. The
 * maintained inverse is updated by the four-step procedure (row add, column
 * add, delete, diagonal correction; the delete must precede the correction
 * so every intermediate matrix stays invertible); Z's column i becomes the
 * elementwise sum and column j is dropped, shifting later columns left.
 */
void remove_cut(FeatureState& state, std::size_t i, std::size_t j);

/**
 * Backward regularization path: fit at the terminal lifetime, then remove
 * cuts in decreasing birth-time order down to lifetime 0, re-evaluating
 * after each removal. Points are returned in ascending lifetime order and
 * each equals a from-scratch model built at that lifetime. O(C^3 + C^2 N)
 * total. Single-threaded per run (the state is mutated in event order).
 */
std::vector<KernelPathPoint> backward_path(std::span<const MondrianTree> trees,
                                           const Matrix& x, std::span<const double> y,
                                           DataSplit split, double delta);

}  // namespace mondrian
