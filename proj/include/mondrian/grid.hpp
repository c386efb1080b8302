#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mondrian/features.hpp"
#include "mondrian/matrix.hpp"

namespace mondrian {

/**
 * Pre-sampled first-cut times for a Mondrian grid ensemble. For each
 * dimension d the distinct data coordinates define gaps; the birth time of
 * the first cut in gap g of grid m is exponential in the gap length. These
 * times are drawn once at initialization and never resampled: activating a
 * cut is purely a comparison against the per-dimension lifetime, which is
 * what makes lifetime changes cheap.
 */
struct IntervalCuts {
  /// coords[d]: sorted distinct d-coordinates of all data points.
  std::vector<std::vector<double>> coords;
  /// first_cut[m][d][g-1]: first-cut time in gap g (between coords[d][g-1]
  /// and coords[d][g]), for g = 1..N_d-1.
  std::vector<std::vector<std::vector<double>>> first_cut;
};

/// Per-dimension lifetimes of the approximated kernel.
struct LifetimeConfig {
  std::vector<double> lambdas;
};

/// A non-empty grid cell: its interval-index key (one active-interval id per
/// dimension), member rows, feature column, and per-dimension neighbor links.
struct GridCell {
  std::vector<std::int32_t> key;
  std::vector<std::int32_t> members;  // ascending data rows
  std::int32_t column = -1;
  std::vector<std::int32_t> prev;  // adjacent cell in each dimension, -1 absent
  std::vector<std::int32_t> next;
  bool alive = true;
};

struct GridState {
  std::shared_ptr<const IntervalCuts> ensemble;
  /// ranks[d][n]: index of point n's d-coordinate in ensemble->coords[d].
  std::shared_ptr<const std::vector<std::vector<std::int32_t>>> ranks;
  LifetimeConfig config;
  std::vector<std::vector<GridCell>> cells;  // per grid
  FeatureState features;

  std::size_t grids() const { return cells.size(); }
  std::size_t dims() const { return config.lambdas.size(); }
};

enum class MoveDir { Increase, Decrease };

struct GridMove {
  int dim = 0;
  MoveDir dir = MoveDir::Increase;
};

struct StepResult {
  GridMove move;
  double rmse_val = 0.0;
};

struct TracePoint {
  std::size_t step = 0;
  std::vector<double> lambdas;
  double rmse_val = 0.0;
  GridMove move;
};

/// Sample all first-cut times, activate the cuts implied by the starting
/// configuration, and build the feature state from scratch.
GridState init_grid(const Matrix& x, std::size_t num_grids, const LifetimeConfig& config0,
                    double delta, std::span<const double> y, DataSplit split,
                    std::uint64_t seed);

/// Activate the globally next cut in dimension d (smallest inactive time
/// across all grids) and advance lambda_d to it. Splits every intersected
/// cell that has points on both sides; one-sided cells are relabeled without
/// matrix work. Returns false when the dimension is exhausted.
bool increase_lifetime(GridState& state, int dim);

/// Deactivate the most recently activated cut in dimension d and drop
/// lambda_d to the next remaining active time (or 0). Pairs of cells with no
/// other separator merge: their columns are removed and the summed column
/// appended. Returns false when no cut is active in the dimension.
bool decrease_lifetime(GridState& state, int dim);

/// Validation RMSE of the current configuration.
FitResult grid_fit_eval(const GridState& state);

/// Probe an increase in every non-exhausted dimension (copy-on-probe) and
/// commit the one with the lowest validation RMSE, ties to the smallest
/// index. Empty when all dimensions are exhausted.
std::optional<StepResult> greedy_step(GridState& state);

/// Probes both directions per dimension. A decrease that would exactly undo
/// the immediately preceding committed move is excluded to prevent a 2-cycle.
std::optional<StepResult> greedy_step_bidirectional(GridState& state,
                                                    const std::optional<GridMove>& last_move);

enum class Optimizer { Greedy, Bidirectional };

/// Iterate the chosen step operation until the budget or exhaustion; the
/// trace records the lambda vector and RMSE after each committed move.
std::vector<TracePoint> run_search(GridState& state, Optimizer optimizer,
                                   std::size_t budget);

/// Dimensions whose lifetime reached the threshold.
std::vector<int> select_features(const LifetimeConfig& config, double eps = 1e-6);

}  // namespace mondrian
