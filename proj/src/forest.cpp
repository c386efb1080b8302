#include "mondrian/forest.hpp"

#include <cmath>
#include <stdexcept>

namespace mondrian {
namespace {

void require_data(const Matrix& x, std::span<const double> y) {
  if (x.rows() == 0) throw std::invalid_argument("forest: empty data");
  if (x.rows() != y.size()) throw std::invalid_argument("forest: |X| != |y|");
  for (const double v : x.data())
    if (!std::isfinite(v)) throw std::invalid_argument("forest: non-finite feature");
  for (const double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("forest: non-finite target");
}

std::vector<LeafStats> leaf_stats_for_tree(const MondrianTree& tree, const Matrix& x,
                                           std::span<const double> y) {
  std::vector<LeafStats> stats(tree.nodes.size());
  for (std::size_t n = 0; n < x.rows(); ++n) {
    const std::int32_t leaf = leaf_of(tree, x.row(n));
    stats[leaf].count += 1;
    stats[leaf].sum_y += y[n];
  }
  return stats;
}

template <bool Parallel>
ForestModel train_impl(const Matrix& x, std::span<const double> y,
                       const ForestOptions& options, std::uint64_t seed) {
  require_data(x, y);
  if (options.trees == 0) throw std::invalid_argument("forest: need at least one tree");
  options.params.validate();

  ForestModel model;
  model.params = options.params;
  model.box = options.box ? *options.box : data_bounding_box(x);
  if (options.box) {
    for (std::size_t n = 0; n < x.rows(); ++n)
      if (!model.box.contains(x.row(n)))
        throw std::invalid_argument("forest: training point outside the sampling box");
  }

  model.trees.resize(options.trees);
  model.leaf_stats.resize(options.trees);
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (std::size_t m = 0; m < options.trees; ++m) {
    RngStream rng(seed, RngStream::stream_hash("tree", m));
    model.trees[m] = sample_mondrian(model.box, options.lifetime, rng);
    model.leaf_stats[m] = leaf_stats_for_tree(model.trees[m], x, y);
  }
  return model;
}

template <bool Parallel>
std::vector<double> predict_batch_impl(const ForestModel& model, const Matrix& x,
                                       std::size_t* clamped) {
  std::vector<double> out(x.rows(), 0.0);
  std::vector<std::size_t> clamp_flags(Parallel || clamped ? x.rows() : 0, 0);
#pragma omp parallel for schedule(static) if (Parallel)
  for (std::size_t n = 0; n < x.rows(); ++n) {
    std::vector<double> p(x.row(n).begin(), x.row(n).end());
    const int moved = clamp_to_box(model.box, p);
    if (!clamp_flags.empty()) clamp_flags[n] = moved > 0 ? 1 : 0;
    double acc = 0.0;
    for (std::size_t m = 0; m < model.trees.size(); ++m) {
      const std::int32_t leaf = leaf_of(model.trees[m], p);
      const LeafStats& s = model.leaf_stats[m][leaf];
      acc += gaussian_posterior(model.params, s.count, s.sum_y).first;
    }
    out[n] = acc / static_cast<double>(model.trees.size());
  }
  if (clamped) {
    *clamped = 0;
    for (const std::size_t f : clamp_flags) *clamped += f;
  }
  return out;
}

}  // namespace

BoundedBox data_bounding_box(const Matrix& x, double rel_pad) {
  if (x.rows() == 0) throw std::invalid_argument("data_bounding_box: empty data");
  std::vector<double> lo(x.cols()), hi(x.cols());
  for (std::size_t d = 0; d < x.cols(); ++d) {
    lo[d] = hi[d] = x(0, d);
    for (std::size_t n = 1; n < x.rows(); ++n) {
      lo[d] = std::min(lo[d], x(n, d));
      hi[d] = std::max(hi[d], x(n, d));
    }
    const double pad = rel_pad * std::max(1.0, std::max(std::abs(lo[d]), std::abs(hi[d])));
    lo[d] -= pad;
    hi[d] += pad;
  }
  return BoundedBox(std::move(lo), std::move(hi));
}

GaussianParams default_gaussian_params(std::span<const double> y) {
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (const double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  GaussianParams p;
  p.prior_mean = mean;
  p.prior_var = var > 0.0 ? var : 1.0;
  p.noise_var = var > 0.0 ? var / 2.0 : 0.5;
  return p;
}

ForestModel train_forest(const Matrix& x, std::span<const double> y,
                         const ForestOptions& options, std::uint64_t seed) {
  return train_impl<true>(x, y, options, seed);
}

ForestModel train_forest_serial(const Matrix& x, std::span<const double> y,
                                const ForestOptions& options, std::uint64_t seed) {
  return train_impl<false>(x, y, options, seed);
}

ForestModel forest_from_trees(std::vector<MondrianTree> trees, const GaussianParams& params,
                              const Matrix& x, std::span<const double> y) {
  require_data(x, y);
  params.validate();
  ForestModel model;
  model.params = params;
  model.box = trees.front().node(trees.front().root).box;
  model.trees = std::move(trees);
  model.leaf_stats.resize(model.trees.size());
  for (std::size_t m = 0; m < model.trees.size(); ++m)
    model.leaf_stats[m] = leaf_stats_for_tree(model.trees[m], x, y);
  return model;
}

double predict(const ForestModel& model, std::span<const double> point) {
  std::vector<double> p(point.begin(), point.end());
  clamp_to_box(model.box, p);
  double acc = 0.0;
  for (std::size_t m = 0; m < model.trees.size(); ++m) {
    const std::int32_t leaf = leaf_of(model.trees[m], p);
    const LeafStats& s = model.leaf_stats[m][leaf];
    acc += gaussian_posterior(model.params, s.count, s.sum_y).first;
  }
  return acc / static_cast<double>(model.trees.size());
}

std::vector<double> predict_batch(const ForestModel& model, const Matrix& x,
                                  std::size_t* clamped) {
  return predict_batch_impl<true>(model, x, clamped);
}

std::vector<double> predict_batch_serial(const ForestModel& model, const Matrix& x,
                                         std::size_t* clamped) {
  return predict_batch_impl<false>(model, x, clamped);
}

std::vector<PathPoint> forward_path(const ForestModel& model, const Matrix& x_train,
                                    std::span<const double> y_train, const Matrix& x_val,
                                    std::span<const double> y_val) {
  require_data(x_train, y_train);
  require_data(x_val, y_val);
  const std::size_t n_train = x_train.rows();
  const std::size_t n_val = x_val.rows();
  const std::size_t n_all = n_train + n_val;
  const std::size_t m_trees = model.trees.size();
  const GaussianParams& params = model.params;

  // Row n of the combined point set: train rows first, then validation rows.
  const auto point_row = [&](std::size_t n) {
    return n < n_train ? x_train.row(n) : x_val.row(n - n_train);
  };
  const auto target = [&](std::size_t n) {
    return n < n_train ? y_train[n] : y_val[n - n_train];
  };

  for (std::size_t n = 0; n < n_all; ++n)
    if (!model.box.contains(point_row(n)))
      throw std::invalid_argument("forward_path: point outside the sampling box; "
                                  "sample the trees on the box of train + val points");

  // Per tree: point -> current leaf (in the lifetime-truncated view), plus
  // member lists and train-only sufficient statistics per current leaf.
  struct TreeState {
    std::vector<std::vector<std::int32_t>> members;  // node id -> point ids
    std::vector<LeafStats> stats;                    // node id -> train stats
    std::vector<double> mean;                        // node id -> posterior mean
  };
  std::vector<TreeState> state(m_trees);
  std::vector<double> y_hat(n_all, 0.0);

  for (std::size_t m = 0; m < m_trees; ++m) {
    TreeState& ts = state[m];
    const std::size_t n_nodes = model.trees[m].nodes.size();
    ts.members.resize(n_nodes);
    ts.stats.resize(n_nodes);
    ts.mean.resize(n_nodes, 0.0);
    const std::int32_t root = model.trees[m].root;
    ts.members[root].reserve(n_all);
    for (std::size_t n = 0; n < n_all; ++n) ts.members[root].push_back(static_cast<std::int32_t>(n));
    for (std::size_t n = 0; n < n_train; ++n) {
      ts.stats[root].count += 1;
      ts.stats[root].sum_y += y_train[n];
    }
    ts.mean[root] = gaussian_posterior(params, ts.stats[root].count, ts.stats[root].sum_y).first;
    for (std::size_t n = 0; n < n_all; ++n) y_hat[n] += ts.mean[root] / static_cast<double>(m_trees);
  }

  double mse_train = 0.0, mse_val = 0.0;
  for (std::size_t n = 0; n < n_all; ++n) {
    const double r = y_hat[n] - target(n);
    if (n < n_train)
      mse_train += r * r / static_cast<double>(n_train);
    else
      mse_val += r * r / static_cast<double>(n_val);
  }

  std::vector<PathPoint> path;
  const std::vector<CutEvent> events = cut_schedule(model.trees);
  path.reserve(events.size() + 1);
  const auto emit = [&](double lifetime) {
    path.push_back(PathPoint{lifetime, std::sqrt(std::max(0.0, mse_train)),
                             std::sqrt(std::max(0.0, mse_val))});
  };
  emit(0.0);

  for (const CutEvent& ev : events) {
    TreeState& ts = state[ev.tree];
    const MondrianTree& tree = model.trees[ev.tree];
    const MondrianNode& node = tree.node(ev.node);
    const std::int32_t left = node.left;
    const std::int32_t right = node.right;

    std::vector<std::int32_t> members = std::move(ts.members[ev.node]);
    ts.members[ev.node].clear();
    for (const std::int32_t n : members) {
      const auto row = point_row(n);
      const std::int32_t child = row[node.cut_dim] <= node.cut_loc ? left : right;
      ts.members[child].push_back(n);
      if (static_cast<std::size_t>(n) < n_train) {
        ts.stats[child].count += 1;
        ts.stats[child].sum_y += target(n);
      }
    }
    ts.mean[left] = gaussian_posterior(params, ts.stats[left].count, ts.stats[left].sum_y).first;
    ts.mean[right] = gaussian_posterior(params, ts.stats[right].count, ts.stats[right].sum_y).first;

    const double mu_old = ts.mean[ev.node];
    const double inv_m = 1.0 / static_cast<double>(m_trees);
    for (const std::int32_t n : members) {
      const auto row = point_row(n);
      const std::int32_t child = row[node.cut_dim] <= node.cut_loc ? left : right;
      const double y_new = y_hat[n] - mu_old * inv_m + ts.mean[child] * inv_m;
      if (static_cast<std::size_t>(n) < n_train)
        mse_train = update_mse(mse_train, y_hat[n], y_new, target(n), n_train);
      else
        mse_val = update_mse(mse_val, y_hat[n], y_new, target(n), n_val);
      y_hat[n] = y_new;
    }
    emit(ev.time);
  }
  return path;
}

}  // namespace mondrian
