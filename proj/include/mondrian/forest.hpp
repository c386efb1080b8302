#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mondrian/gaussian.hpp"
#include "mondrian/matrix.hpp"
#include "mondrian/tree.hpp"

namespace mondrian {

/// One evaluation of a model along a lifetime regularization path.
struct PathPoint {
  double lifetime = 0.0;
  double rmse_train = 0.0;
  double rmse_val = 0.0;
};

struct ForestOptions {
  std::size_t trees = 10;
  double lifetime = 1.0;
  GaussianParams params;
  /// Box to sample the trees on. Defaults to the padded bounding box of the
  /// training points; paths pass the box of train + validation points so
  /// every evaluation point has a defined leaf.
  std::optional<BoundedBox> box;
};

/// Mondrian forest regressor: M independent partitions, one conjugate
/// Gaussian cell model per leaf, predictions averaged over trees.
struct ForestModel {
  std::vector<MondrianTree> trees;
  GaussianParams params;
  /// leaf_stats[m][node id], populated for leaves, zero elsewhere.
  std::vector<std::vector<LeafStats>> leaf_stats;
  BoundedBox box;
};

/// Bounding box of the rows of X, expanded by a relative padding per side.
BoundedBox data_bounding_box(const Matrix& x, double rel_pad = 1e-9);

/// Default hyperparameters when unset: prior mean = mean(y), prior variance =
/// var(y), noise variance = var(y)/2 (a heuristic; falls back to 1 and 1/2
/// for constant targets).
GaussianParams default_gaussian_params(std::span<const double> y);

/// Sample M trees and populate per-leaf statistics. Trees are sampled in
/// parallel from per-tree streams, so the result is independent of thread
/// count; the _serial variant is the reference kept for testing.
ForestModel train_forest(const Matrix& x, std::span<const double> y,
                         const ForestOptions& options, std::uint64_t seed);
ForestModel train_forest_serial(const Matrix& x, std::span<const double> y,
                                const ForestOptions& options, std::uint64_t seed);

/// Attach leaf statistics for the given training data to existing trees.
ForestModel forest_from_trees(std::vector<MondrianTree> trees, const GaussianParams& params,
                              const Matrix& x, std::span<const double> y);

/// Average of per-tree leaf posterior means. Points outside the sampling box
/// are clamped coordinate-wise.
double predict(const ForestModel& model, std::span<const double> point);

/// Predictions for every row of X; `clamped` (when given) receives the count
/// of rows that needed clamping.
std::vector<double> predict_batch(const ForestModel& model, const Matrix& x,
                                  std::size_t* clamped = nullptr);
std::vector<double> predict_batch_serial(const ForestModel& model, const Matrix& x,
                                         std::size_t* clamped = nullptr);

/// Exact incremental replacement of one residual's contribution to a mean
/// squared error over n points.
inline double update_mse(double mse, double y_hat_old, double y_hat_new, double y,
                         std::size_t n) {
  const double r_old = y_hat_old - y;
  const double r_new = y_hat_new - y;
  return mse - r_old * r_old / static_cast<double>(n) +
         r_new * r_new / static_cast<double>(n);
}

/**
 * Forward regularization path over the lifetime: one PathPoint at lifetime 0
 * plus one per cut event across the model's trees, maintaining predictions
 * and squared errors incrementally. Only points in the split leaf are touched
 * per event, and every emitted point equals a from-scratch evaluation of the
 * same trees truncated at that lifetime.
 *
 * The model must carry trees sampled to the terminal lifetime on a box
 * covering both point sets. Single-threaded: the shared (y_hat, MSE) state is
 * mutated in event order.
 */
std::vector<PathPoint> forward_path(const ForestModel& model, const Matrix& x_train,
                                    std::span<const double> y_train, const Matrix& x_val,
                                    std::span<const double> y_val);

}  // namespace mondrian
