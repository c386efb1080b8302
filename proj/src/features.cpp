#include "mondrian/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mondrian {
namespace {

void require_split(const DataSplit& split, std::size_t n_rows) {
  if (split.train.empty() || split.val.empty())
    throw std::invalid_argument("split: both index sets must be non-empty");
  std::vector<char> seen(n_rows, 0);
  for (const int r : split.train) {
    if (r < 0 || static_cast<std::size_t>(r) >= n_rows || seen[r])
      throw std::invalid_argument("split: bad or duplicate train index");
    seen[r] = 1;
  }
  for (const int r : split.val) {
    if (r < 0 || static_cast<std::size_t>(r) >= n_rows || seen[r])
      throw std::invalid_argument("split: bad or duplicate val index");
    seen[r] = 1;
  }
}

double rmse_over(std::span<const int> rows, std::span<const double> pred,
                 std::span<const double> truth) {
  double acc = 0.0;
  for (const int r : rows) {
    const double d = pred[r] - truth[r];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(rows.size()));
}

/// Per-tree column layout: leaf id -> local column (discovery order), plus
/// each data row's leaf.
struct TreeBlock {
  std::vector<std::int32_t> row_leaf;    // data row -> leaf id
  std::vector<std::int32_t> leaf_order;  // local column -> leaf id
};

TreeBlock block_for_tree(const MondrianTree& tree, const Matrix& x) {
  TreeBlock block;
  block.row_leaf.resize(x.rows());
  std::vector<std::int32_t> leaf_col(tree.nodes.size(), -1);
  for (std::size_t n = 0; n < x.rows(); ++n) {
    const std::int32_t leaf = leaf_of(tree, x.row(n));
    block.row_leaf[n] = leaf;
    if (leaf_col[leaf] < 0) {
      leaf_col[leaf] = static_cast<std::int32_t>(block.leaf_order.size());
      block.leaf_order.push_back(leaf);
    }
  }
  return block;
}

template <bool Parallel>
FeatureState build_impl(std::span<const MondrianTree> trees, const Matrix& x,
                        std::span<const double> y, DataSplit split, double delta) {
  if (trees.empty()) throw std::invalid_argument("build_features: no trees");
  if (x.rows() != y.size()) throw std::invalid_argument("build_features: |X| != |y|");
  require_split(split, x.rows());
  for (std::size_t n = 0; n < x.rows(); ++n)
    if (!trees[0].node(trees[0].root).box.contains(x.row(n)))
      throw std::invalid_argument("build_features: point outside the tree box");

  std::vector<TreeBlock> blocks(trees.size());
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (std::size_t m = 0; m < trees.size(); ++m) blocks[m] = block_for_tree(trees[m], x);

  std::vector<std::size_t> offset(trees.size() + 1, 0);
  for (std::size_t m = 0; m < trees.size(); ++m)
    offset[m + 1] = offset[m] + blocks[m].leaf_order.size();
  const std::size_t total_cols = offset.back();

  FeatureState state;
  state.y.assign(y.begin(), y.end());
  state.split = std::move(split);
  state.delta = delta;
  state.num_partitions = trees.size();
  state.z = Matrix(x.rows(), total_cols);
  state.col_cell.resize(total_cols);

  const double value = 1.0 / std::sqrt(static_cast<double>(trees.size()));
  for (std::size_t m = 0; m < trees.size(); ++m) {
    const TreeBlock& block = blocks[m];
    std::vector<std::int32_t> leaf_col(trees[m].nodes.size(), -1);
    for (std::size_t c = 0; c < block.leaf_order.size(); ++c) {
      leaf_col[block.leaf_order[c]] = static_cast<std::int32_t>(offset[m] + c);
      state.col_cell[offset[m] + c] =
          ColRef{static_cast<std::int32_t>(m), block.leaf_order[c]};
    }
    for (std::size_t n = 0; n < x.rows(); ++n)
      state.z(n, leaf_col[block.row_leaf[n]]) = value;
  }

  state.inv = RegularizedInverse::from_features(state.z, state.split.train, delta);
  return state;
}

}  // namespace

void FeatureState::refresh_if_needed() {
  if (inv.needs_refresh()) inv.refresh(z, split.train);
}

FeatureState build_features(std::span<const MondrianTree> trees, const Matrix& x,
                            std::span<const double> y, DataSplit split, double delta) {
  return build_impl<true>(trees, x, y, std::move(split), delta);
}

FeatureState build_features_serial(std::span<const MondrianTree> trees, const Matrix& x,
                                   std::span<const double> y, DataSplit split,
                                   double delta) {
  return build_impl<false>(trees, x, y, std::move(split), delta);
}

double approx_kernel(const FeatureState& state, std::size_t i, std::size_t j) {
  if (i >= state.z.rows() || j >= state.z.rows())
    throw std::invalid_argument("approx_kernel: row out of range");
  const auto ri = state.z.row(i);
  const auto rj = state.z.row(j);
  double acc = 0.0;
  for (std::size_t c = 0; c < ri.size(); ++c) acc += ri[c] * rj[c];
  return acc;
}

FitResult fit_eval(const FeatureState& state) {
  const std::size_t c = state.cols();
  // rhs = Z_train^T y_train, exploiting row sparsity of the indicators.
  std::vector<double> rhs(c, 0.0);
  for (const int r : state.split.train) {
    const auto row = state.z.row(r);
    const double yr = state.y[r];
    for (std::size_t k = 0; k < c; ++k)
      if (row[k] != 0.0) rhs[k] += row[k] * yr;
  }
  FitResult result;
  result.theta = matvec(state.inv.matrix(), rhs);
  std::vector<double> pred(state.z.rows(), 0.0);
  for (std::size_t n = 0; n < state.z.rows(); ++n) {
    const auto row = state.z.row(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < c; ++k)
      if (row[k] != 0.0) acc += row[k] * result.theta[k];
    pred[n] = acc;
  }
  result.rmse_train = rmse_over(state.split.train, pred, state.y);
  result.rmse_val = rmse_over(state.split.val, pred, state.y);
  return result;
}

double kernel_predict(const FeatureState& state, std::span<const MondrianTree> trees,
                      std::span<const double> theta, std::span<const double> point) {
  // cell -> column lookup per tree.
  std::vector<std::unordered_map<std::int32_t, std::size_t>> col_of(trees.size());
  for (std::size_t c = 0; c < state.col_cell.size(); ++c)
    col_of[state.col_cell[c].owner].emplace(state.col_cell[c].cell, c);

  std::vector<double> p(point.begin(), point.end());
  clamp_to_box(trees[0].node(trees[0].root).box, p);
  const double value = 1.0 / std::sqrt(static_cast<double>(trees.size()));
  double acc = 0.0;
  for (std::size_t m = 0; m < trees.size(); ++m) {
    const std::int32_t leaf = leaf_of(trees[m], p);
    const auto it = col_of[m].find(leaf);
    if (it != col_of[m].end()) acc += value * theta[it->second];
  }
  return acc;
}

void remove_cut(FeatureState& state, std::size_t i, std::size_t j) {
  const std::size_t c = state.cols();
  if (i == j || i >= c || j >= c)
    throw std::invalid_argument("remove_cut: need two distinct valid columns");
  if (i > j) std::swap(i, j);

  // r = row j of the tracked matrix Z_train^T Z_train + delta^2 I.
  std::vector<double> r(c, 0.0);
  for (const int n : state.split.train) {
    const double znj = state.z(n, j);
    if (znj == 0.0) continue;
    const auto row = state.z.row(n);
    for (std::size_t k = 0; k < c; ++k) r[k] += znj * row[k];
  }
  r[j] += state.delta * state.delta;

  std::vector<double> e_i(c, 0.0);
  e_i[i] = 1.0;

  // (1) add row j to row i
  state.inv.rank1_update(e_i, r);
  // (2) add column j to column i; after (1) the j-th column of the tracked
  // matrix is r with r[j] added at position i.
  std::vector<double> col_j = r;
  col_j[i] += r[j];
  state.inv.rank1_update(col_j, e_i);
  // (3) drop row/column j, then (4) subtract the doubled delta^2 at (i, i);
  // this order keeps every intermediate matrix invertible.
  state.inv.delete_row_col(j);
  std::vector<double> e_short(c - 1, 0.0);
  e_short[i] = -state.delta * state.delta;
  std::vector<double> v_short(c - 1, 0.0);
  v_short[i] = 1.0;
  state.inv.rank1_update(e_short, v_short);
  state.inv.symmetrize();

  // Column i becomes the indicator of the merged cell (disjoint supports, so
  // entries stay in {0, 1/sqrt(M)}); column j disappears.
  for (std::size_t n = 0; n < state.z.rows(); ++n) state.z(n, i) += state.z(n, j);
  state.z.remove_column(j);
  state.col_cell.erase(state.col_cell.begin() + static_cast<std::ptrdiff_t>(j));

  state.refresh_if_needed();
}

std::vector<KernelPathPoint> backward_path(std::span<const MondrianTree> trees,
                                           const Matrix& x, std::span<const double> y,
                                           DataSplit split, double delta) {
  FeatureState state = build_features(trees, x, y, std::move(split), delta);

  // Current column of each node's cell, per tree; leaves seeded from the
  // build, parents filled in as merges walk up.
  std::vector<std::vector<std::int32_t>> node_col(trees.size());
  for (std::size_t m = 0; m < trees.size(); ++m)
    node_col[m].assign(trees[m].nodes.size(), -1);
  for (std::size_t c = 0; c < state.col_cell.size(); ++c)
    node_col[state.col_cell[c].owner][state.col_cell[c].cell] =
        static_cast<std::int32_t>(c);

  std::vector<CutEvent> events = cut_schedule(trees);

  std::vector<KernelPathPoint> path;
  path.reserve(events.size() + 1);
  const auto emit = [&](double lifetime) {
    const FitResult fit = fit_eval(state);
    path.push_back(KernelPathPoint{lifetime, fit.rmse_train, fit.rmse_val, state.cols()});
  };

  double terminal = 0.0;
  for (const auto& tree : trees) terminal = std::max(terminal, tree.lifetime);
  emit(terminal);

  for (std::size_t idx = events.size(); idx-- > 0;) {
    const CutEvent& ev = events[idx];
    const MondrianNode& node = trees[ev.tree].node(ev.node);
    const std::int32_t ca = node_col[ev.tree][node.left];
    const std::int32_t cb = node_col[ev.tree][node.right];

    if (ca >= 0 && cb >= 0) {
      const auto i = static_cast<std::size_t>(std::min(ca, cb));
      const auto j = static_cast<std::size_t>(std::max(ca, cb));
      remove_cut(state, i, j);
      state.col_cell[i] = ColRef{ev.tree, ev.node};
      node_col[ev.tree][ev.node] = static_cast<std::int32_t>(i);
      for (auto& cols : node_col)
        for (auto& col : cols)
          if (col > static_cast<std::int32_t>(j)) --col;
    } else if (ca >= 0 || cb >= 0) {
      // Only one side holds data; the merged cell is that column, relabeled.
      const std::int32_t col = ca >= 0 ? ca : cb;
      node_col[ev.tree][ev.node] = col;
      state.col_cell[col] = ColRef{ev.tree, ev.node};
    }
    emit(idx > 0 ? events[idx - 1].time : 0.0);
  }

  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace mondrian
