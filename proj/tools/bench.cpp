// Timing harness comparing the OpenMP kernels against their serial
// references. The numeric outputs must agree exactly; speedup is reported
// per kernel.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mondrian/features.hpp"
#include "mondrian/forest.hpp"
#include "mondrian/linalg.hpp"
#include "mondrian/parallel.hpp"
#include "mondrian/rng.hpp"

using namespace mondrian;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    f();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

void report(const char* name, double serial, double parallel, double diff) {
  std::printf("%-22s %10.4fs %10.4fs %8.2fx   max|diff| %.3g\n", name, serial, parallel,
              serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap_from_env();

  std::size_t n = 4000;
  std::size_t dims = 4;
  std::size_t trees = 64;
  double lifetime = 2.0;
  int reps = 3;

  CLI::App app{"serial vs OpenMP kernel comparison"};
  app.add_option("--n", n, "rows")->capture_default_str();
  app.add_option("--dims", dims, "columns")->capture_default_str();
  app.add_option("--trees", trees, "partitions")->capture_default_str();
  app.add_option("--lifetime", lifetime, "tree lifetime")->capture_default_str();
  app.add_option("--reps", reps, "repetitions, best time kept")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::printf("threads: %d\n", effective_threads());
  std::printf("%-22s %11s %11s %9s\n", "kernel", "serial", "omp", "speedup");

  RngStream rng(4242, 0);
  Matrix x(n, dims);
  for (auto& v : x.data()) v = rng.u01();
  std::vector<double> y(n);
  for (auto& v : y) v = rng.uniform(-1.0, 1.0);

  ForestOptions opt;
  opt.trees = trees;
  opt.lifetime = lifetime;
  opt.params = default_gaussian_params(y);

  ForestModel model_par, model_ser;
  const double t_train_ser =
      time_best_of(reps, [&] { model_ser = train_forest_serial(x, y, opt, 7); });
  const double t_train_par =
      time_best_of(reps, [&] { model_par = train_forest(x, y, opt, 7); });
  double train_diff = 0.0;
  for (std::size_t m = 0; m < trees; ++m)
    train_diff = std::max(
        train_diff, static_cast<double>(model_par.trees[m].nodes.size() !=
                                        model_ser.trees[m].nodes.size()));
  report("train_forest", t_train_ser, t_train_par, train_diff);

  std::vector<double> pred_ser, pred_par;
  const double t_pred_ser =
      time_best_of(reps, [&] { pred_ser = predict_batch_serial(model_ser, x); });
  const double t_pred_par =
      time_best_of(reps, [&] { pred_par = predict_batch(model_par, x); });
  double pred_diff = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    pred_diff = std::max(pred_diff, std::abs(pred_ser[i] - pred_par[i]));
  report("predict_batch", t_pred_ser, t_pred_par, pred_diff);

  // Feature-state construction includes the one-time O(C^3) inverse, which
  // swamps the block-building loops at large C; benchmark it on a moderate
  // feature count.
  const std::size_t n_f = std::min<std::size_t>(n, 1200);
  Matrix xf(n_f, dims);
  for (std::size_t i = 0; i < n_f; ++i)
    for (std::size_t d = 0; d < dims; ++d) xf(i, d) = x(i, d);
  const std::vector<double> yf(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_f));
  std::vector<MondrianTree> feat_trees;
  for (std::size_t m = 0; m < std::min<std::size_t>(trees, 16); ++m) {
    RngStream tree_rng(7, RngStream::stream_hash("tree", m));
    feat_trees.push_back(sample_mondrian(data_bounding_box(xf), 1.0, tree_rng));
  }
  DataSplit split;
  for (std::size_t i = 0; i < n_f; ++i)
    (i % 5 == 4 ? split.val : split.train).push_back(static_cast<int>(i));
  FeatureState feat_ser, feat_par;
  const double t_feat_ser = time_best_of(
      reps, [&] { feat_ser = build_features_serial(feat_trees, xf, yf, split, 1.0); });
  const double t_feat_par = time_best_of(
      reps, [&] { feat_par = build_features(feat_trees, xf, yf, split, 1.0); });
  report("build_features", t_feat_ser, t_feat_par, max_abs_diff(feat_ser.z, feat_par.z));

  // Gram of the Laplace kernel on a row subset (the full N x N is the point,
  // but keep the benchmark quick).
  const std::size_t gram_rows_n = std::min<std::size_t>(n, 1500);
  Matrix xg(gram_rows_n, dims);
  for (std::size_t i = 0; i < gram_rows_n; ++i)
    for (std::size_t d = 0; d < dims; ++d) xg(i, d) = x(i, d);
  const std::vector<double> lifetimes(dims, 1.0);
  Matrix gram_ser, gram_par;
  const double t_gram_ser =
      time_best_of(reps, [&] { gram_ser = laplace_gram_serial(xg, lifetimes); });
  const double t_gram_par =
      time_best_of(reps, [&] { gram_par = laplace_gram(xg, lifetimes); });
  report("laplace_gram", t_gram_ser, t_gram_par, max_abs_diff(gram_ser, gram_par));

  return 0;
}
