#include "mondrian/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "mondrian/rng.hpp"

namespace mondrian {
namespace {

double feature_value(std::size_t num_grids) {
  return 1.0 / std::sqrt(static_cast<double>(num_grids));
}

/// Sorted gap indices active in (grid m, dim d) under the given lifetime.
std::vector<std::int32_t> active_gaps(const IntervalCuts& cuts, std::size_t m, int d,
                                      double lambda) {
  std::vector<std::int32_t> gaps;
  const auto& times = cuts.first_cut[m][d];
  for (std::size_t g = 0; g < times.size(); ++g)
    if (times[g] <= lambda) gaps.push_back(static_cast<std::int32_t>(g) + 1);
  return gaps;
}

/// Border column and diagonal entry for extending the tracked matrix with a
/// new feature column: b = Z_train^T z_new, d = z_new^T z_new + delta^2.
std::pair<std::vector<double>, double> border_for_column(const FeatureState& f,
                                                         std::span<const double> z_new) {
  std::vector<double> b(f.cols(), 0.0);
  double diag = f.delta * f.delta;
  for (const int n : f.split.train) {
    const double v = z_new[n];
    if (v == 0.0) continue;
    diag += v * v;
    const auto row = f.z.row(n);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] += v * row[k];
  }
  return {std::move(b), diag};
}

void shift_columns_after_delete(GridState& state, std::int32_t deleted) {
  for (auto& grid : state.cells)
    for (auto& cell : grid)
      if (cell.alive && cell.column > deleted) --cell.column;
}

void rebuild_neighbor_links(GridState& state, std::size_t m) {
  auto& grid = state.cells[m];
  const std::size_t dims = state.dims();
  for (auto& cell : grid) {
    cell.prev.assign(dims, -1);
    cell.next.assign(dims, -1);
  }
  std::vector<std::int32_t> reduced;
  for (std::size_t d = 0; d < dims; ++d) {
    // Group cells sharing every key component except d, then link them in
    // key_d order.
    std::map<std::vector<std::int32_t>, std::vector<std::pair<std::int32_t, std::int32_t>>>
        lines;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!grid[k].alive) continue;
      reduced = grid[k].key;
      reduced[d] = -1;
      lines[reduced].emplace_back(grid[k].key[d], static_cast<std::int32_t>(k));
    }
    for (auto& [_, line] : lines) {
      std::sort(line.begin(), line.end());
      for (std::size_t i = 1; i < line.size(); ++i) {
        grid[line[i - 1].second].next[d] = line[i].second;
        grid[line[i].second].prev[d] = line[i - 1].second;
      }
    }
  }
}

void rebuild_col_cell(GridState& state) {
  state.features.col_cell.assign(state.features.cols(), ColRef{});
  for (std::size_t m = 0; m < state.grids(); ++m)
    for (std::size_t k = 0; k < state.cells[m].size(); ++k) {
      const GridCell& cell = state.cells[m][k];
      if (cell.alive)
        state.features.col_cell[cell.column] =
            ColRef{static_cast<std::int32_t>(m), static_cast<std::int32_t>(k)};
    }
}

void compact_dead_cells(GridState& state, std::size_t m) {
  auto& grid = state.cells[m];
  grid.erase(std::remove_if(grid.begin(), grid.end(),
                            [](const GridCell& c) { return !c.alive; }),
             grid.end());
}

void finish_event(GridState& state, std::size_t m) {
  compact_dead_cells(state, m);
  rebuild_neighbor_links(state, m);
  rebuild_col_cell(state);
  state.features.inv.symmetrize();
  state.features.refresh_if_needed();
}

}  // namespace

GridState init_grid(const Matrix& x, std::size_t num_grids, const LifetimeConfig& config0,
                    double delta, std::span<const double> y, DataSplit split,
                    std::uint64_t seed) {
  if (x.rows() < 2) throw std::invalid_argument("init_grid: need at least 2 rows");
  if (num_grids == 0) throw std::invalid_argument("init_grid: need at least one grid");
  if (x.rows() != y.size()) throw std::invalid_argument("init_grid: |X| != |y|");
  if (config0.lambdas.size() != x.cols())
    throw std::invalid_argument("init_grid: lifetime configuration size != D");
  for (const double l : config0.lambdas)
    if (!(l >= 0.0) || !std::isfinite(l))
      throw std::invalid_argument("init_grid: lifetimes must be finite and >= 0");
  for (const double v : x.data())
    if (!std::isfinite(v)) throw std::invalid_argument("init_grid: non-finite feature");

  const std::size_t n = x.rows();
  const std::size_t dims = x.cols();

  auto cuts = std::make_shared<IntervalCuts>();
  cuts->coords.resize(dims);
  auto ranks = std::make_shared<std::vector<std::vector<std::int32_t>>>(
      dims, std::vector<std::int32_t>(n));
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double>& c = cuts->coords[d];
    c.reserve(n);
    for (std::size_t r = 0; r < n; ++r) c.push_back(x(r, d));
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    for (std::size_t r = 0; r < n; ++r)
      (*ranks)[d][r] = static_cast<std::int32_t>(
          std::lower_bound(c.begin(), c.end(), x(r, d)) - c.begin());
  }

  cuts->first_cut.resize(num_grids);
  for (std::size_t m = 0; m < num_grids; ++m) {
    cuts->first_cut[m].resize(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      const auto& c = cuts->coords[d];
      auto& times = cuts->first_cut[m][d];
      times.resize(c.size() >= 1 ? c.size() - 1 : 0);
      RngStream rng(seed, RngStream::stream_hash("grid-cuts", m * dims + d));
      for (std::size_t g = 1; g < c.size(); ++g)
        times[g - 1] = rng.exponential(c[g] - c[g - 1]);
    }
  }

  GridState state;
  state.ensemble = std::move(cuts);
  state.ranks = std::move(ranks);
  state.config = config0;
  state.cells.resize(num_grids);

  // Assign cells by key in discovery order (scanning rows ascending), one
  // grid after another, so the column layout is deterministic.
  std::size_t total_cols = 0;
  std::vector<std::vector<std::int32_t>> row_col(num_grids,
                                                 std::vector<std::int32_t>(n, -1));
  for (std::size_t m = 0; m < num_grids; ++m) {
    std::vector<std::vector<std::int32_t>> gaps(dims);
    for (std::size_t d = 0; d < dims; ++d)
      gaps[d] = active_gaps(*state.ensemble, m, static_cast<int>(d),
                            state.config.lambdas[d]);
    std::map<std::vector<std::int32_t>, std::size_t> by_key;
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<std::int32_t> key(dims);
      for (std::size_t d = 0; d < dims; ++d) {
        const auto& g = gaps[d];
        key[d] = static_cast<std::int32_t>(
            std::upper_bound(g.begin(), g.end(), (*state.ranks)[d][r]) - g.begin());
      }
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        GridCell cell;
        cell.key = key;
        cell.column = static_cast<std::int32_t>(total_cols++);
        cell.prev.assign(dims, -1);
        cell.next.assign(dims, -1);
        it = by_key.emplace(std::move(key), state.cells[m].size()).first;
        state.cells[m].push_back(std::move(cell));
      }
      GridCell& cell = state.cells[m][it->second];
      cell.members.push_back(static_cast<std::int32_t>(r));
      row_col[m][r] = cell.column;
    }
  }

  FeatureState& f = state.features;
  f.y.assign(y.begin(), y.end());
  f.split = std::move(split);
  f.delta = delta;
  f.num_partitions = num_grids;
  f.z = Matrix(n, total_cols);
  const double value = feature_value(num_grids);
  for (std::size_t m = 0; m < num_grids; ++m)
    for (std::size_t r = 0; r < n; ++r) f.z(r, row_col[m][r]) = value;
  f.inv = RegularizedInverse::from_features(f.z, f.split.train, delta);

  for (std::size_t m = 0; m < num_grids; ++m) rebuild_neighbor_links(state, m);
  rebuild_col_cell(state);
  return state;
}

bool increase_lifetime(GridState& state, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  if (d >= state.dims()) throw std::invalid_argument("increase_lifetime: bad dimension");
  const double lambda = state.config.lambdas[d];

  // Globally next cut: smallest inactive time over all grids.
  double best_t = std::numeric_limits<double>::infinity();
  std::size_t best_m = 0;
  std::int32_t best_g = -1;
  for (std::size_t m = 0; m < state.grids(); ++m) {
    const auto& times = state.ensemble->first_cut[m][d];
    for (std::size_t g = 0; g < times.size(); ++g)
      if (times[g] > lambda && times[g] < best_t) {
        best_t = times[g];
        best_m = m;
        best_g = static_cast<std::int32_t>(g) + 1;
      }
  }
  if (best_g < 0) return false;  // dimension exhausted

  state.config.lambdas[d] = best_t;
  const auto& rank = (*state.ranks)[d];
  const double value = feature_value(state.grids());
  FeatureState& f = state.features;

  const std::size_t original_cells = state.cells[best_m].size();
  for (std::size_t k = 0; k < original_cells; ++k) {
    std::vector<std::int32_t> lo, hi;
    for (const std::int32_t r : state.cells[best_m][k].members)
      (rank[r] < best_g ? lo : hi).push_back(r);
    if (hi.empty()) continue;
    if (lo.empty()) {
      state.cells[best_m][k].key[d] += 1;  // relabel, no matrix change
      continue;
    }

    const std::int32_t old_col = state.cells[best_m][k].column;
    f.z.remove_column(old_col);
    f.inv.delete_row_col(old_col);
    shift_columns_after_delete(state, old_col);

    std::vector<double> z_lo(f.z.rows(), 0.0), z_hi(f.z.rows(), 0.0);
    for (const std::int32_t r : lo) z_lo[r] = value;
    for (const std::int32_t r : hi) z_hi[r] = value;

    auto [b_lo, d_lo] = border_for_column(f, z_lo);
    f.inv.extend_row_col(b_lo, b_lo, d_lo);
    f.z.append_column(z_lo);
    const auto col_lo = static_cast<std::int32_t>(f.cols() - 1);

    auto [b_hi, d_hi] = border_for_column(f, z_hi);
    f.inv.extend_row_col(b_hi, b_hi, d_hi);
    f.z.append_column(z_hi);
    const auto col_hi = static_cast<std::int32_t>(f.cols() - 1);

    GridCell hi_cell;
    hi_cell.key = state.cells[best_m][k].key;
    hi_cell.key[d] += 1;
    hi_cell.members = std::move(hi);
    hi_cell.column = col_hi;
    hi_cell.prev.assign(state.dims(), -1);
    hi_cell.next.assign(state.dims(), -1);

    GridCell& lo_cell = state.cells[best_m][k];
    lo_cell.members = std::move(lo);
    lo_cell.column = col_lo;
    state.cells[best_m].push_back(std::move(hi_cell));
  }

  finish_event(state, best_m);
  return true;
}

bool decrease_lifetime(GridState& state, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  if (d >= state.dims()) throw std::invalid_argument("decrease_lifetime: bad dimension");
  const double lambda = state.config.lambdas[d];

  // Most recently activated cut: largest active time over all grids.
  double best_t = -1.0;
  std::size_t best_m = 0;
  std::int32_t best_g = -1;
  double second_t = 0.0;
  for (std::size_t m = 0; m < state.grids(); ++m) {
    const auto& times = state.ensemble->first_cut[m][d];
    for (std::size_t g = 0; g < times.size(); ++g)
      if (times[g] <= lambda && times[g] > best_t) {
        best_t = times[g];
        best_m = m;
        best_g = static_cast<std::int32_t>(g) + 1;
      }
  }
  if (best_g < 0) return false;  // nothing active
  for (std::size_t m = 0; m < state.grids(); ++m) {
    const auto& times = state.ensemble->first_cut[m][d];
    for (std::size_t g = 0; g < times.size(); ++g)
      if (times[g] <= lambda && times[g] < best_t) second_t = std::max(second_t, times[g]);
  }
  state.config.lambdas[d] = second_t;

  auto& grid = state.cells[best_m];

  // Rank of the removed gap among the active ones: cells with key_d == j-1
  // and their next-neighbor with key_d == j were separated only by this cut.
  const std::vector<std::int32_t> gaps =
      active_gaps(*state.ensemble, best_m, dim, lambda);
  const auto j = static_cast<std::int32_t>(
      std::lower_bound(gaps.begin(), gaps.end(), best_g) - gaps.begin() + 1);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (below, above)
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k].key[d] != j - 1 || grid[k].next[d] < 0) continue;
    const auto nb = static_cast<std::size_t>(grid[k].next[d]);
    if (grid[nb].key[d] == j) pairs.emplace_back(k, nb);
  }
  // Cells above the removed cut get renumbered whether or not they merge.
  for (auto& cell : grid)
    if (cell.key[d] >= j) cell.key[d] -= 1;

  FeatureState& f = state.features;
  for (const auto& [a_idx, b_idx] : pairs) {
    GridCell& a = grid[a_idx];
    GridCell& b = grid[b_idx];
    std::vector<double> z_sum(f.z.rows(), 0.0);
    for (std::size_t r = 0; r < f.z.rows(); ++r)
      z_sum[r] = f.z(r, a.column) + f.z(r, b.column);

    const std::int32_t hi_col = std::max(a.column, b.column);
    const std::int32_t lo_col = std::min(a.column, b.column);
    f.z.remove_column(hi_col);
    f.inv.delete_row_col(hi_col);
    shift_columns_after_delete(state, hi_col);
    f.z.remove_column(lo_col);
    f.inv.delete_row_col(lo_col);
    shift_columns_after_delete(state, lo_col);

    auto [border, diag] = border_for_column(f, z_sum);
    f.inv.extend_row_col(border, border, diag);
    f.z.append_column(z_sum);

    std::vector<std::int32_t> merged;
    merged.reserve(a.members.size() + b.members.size());
    std::merge(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
               std::back_inserter(merged));
    a.members = std::move(merged);
    a.column = static_cast<std::int32_t>(f.cols() - 1);
    b.alive = false;
  }

  finish_event(state, best_m);
  return true;
}

FitResult grid_fit_eval(const GridState& state) { return fit_eval(state.features); }

namespace {

std::optional<StepResult> best_of_moves(GridState& state,
                                        const std::vector<GridMove>& moves) {
  struct Probe {
    bool legal = false;
    double rmse = 0.0;
    GridState state;
  };
  std::vector<Probe> probes(moves.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < moves.size(); ++i) {
    GridState copy = state;
    const bool ok = moves[i].dir == MoveDir::Increase
                        ? increase_lifetime(copy, moves[i].dim)
                        : decrease_lifetime(copy, moves[i].dim);
    if (!ok) continue;
    probes[i].legal = true;
    probes[i].rmse = grid_fit_eval(copy).rmse_val;
    probes[i].state = std::move(copy);
  }
  std::size_t best = moves.size();
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (!probes[i].legal) continue;
    if (best == moves.size() || probes[i].rmse < probes[best].rmse) best = i;
  }
  if (best == moves.size()) return std::nullopt;
  state = std::move(probes[best].state);
  return StepResult{moves[best], probes[best].rmse};
}

}  // namespace

std::optional<StepResult> greedy_step(GridState& state) {
  std::vector<GridMove> moves;
  for (std::size_t d = 0; d < state.dims(); ++d)
    moves.push_back(GridMove{static_cast<int>(d), MoveDir::Increase});
  return best_of_moves(state, moves);
}

std::optional<StepResult> greedy_step_bidirectional(
    GridState& state, const std::optional<GridMove>& last_move) {
  std::vector<GridMove> moves;
  for (std::size_t d = 0; d < state.dims(); ++d)
    moves.push_back(GridMove{static_cast<int>(d), MoveDir::Increase});
  for (std::size_t d = 0; d < state.dims(); ++d) {
    // Skip the decrease that would exactly revert the previous commit.
    if (last_move && last_move->dir == MoveDir::Increase &&
        last_move->dim == static_cast<int>(d))
      continue;
    moves.push_back(GridMove{static_cast<int>(d), MoveDir::Decrease});
  }
  return best_of_moves(state, moves);
}

std::vector<TracePoint> run_search(GridState& state, Optimizer optimizer,
                                   std::size_t budget) {
  if (budget < 1) throw std::invalid_argument("run_search: budget must be >= 1");
  std::vector<TracePoint> trace;
  std::optional<GridMove> last;
  for (std::size_t step = 1; step <= budget; ++step) {
    const auto result = optimizer == Optimizer::Greedy
                            ? greedy_step(state)
                            : greedy_step_bidirectional(state, last);
    if (!result) break;
    last = result->move;
    trace.push_back(TracePoint{step, state.config.lambdas, result->rmse_val, result->move});
  }
  return trace;
}

std::vector<int> select_features(const LifetimeConfig& config, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("select_features: eps must be > 0");
  std::vector<int> out;
  for (std::size_t d = 0; d < config.lambdas.size(); ++d)
    if (config.lambdas[d] >= eps) out.push_back(static_cast<int>(d));
  return out;
}

}  // namespace mondrian
