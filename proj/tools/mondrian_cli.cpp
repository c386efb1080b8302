#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mondrian/dataset.hpp"
#include "mondrian/features.hpp"
#include "mondrian/forest.hpp"
#include "mondrian/grid.hpp"
#include "mondrian/linalg.hpp"
#include "mondrian/parallel.hpp"
#include "mondrian/stats.hpp"
#include "mondrian/tree_json.hpp"

namespace {

using nlohmann::json;
using namespace mondrian;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerifyFailure = 3;

struct VerifyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot write output file: " + out_path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

/// Common experiment flags shared by the model subcommands.
struct CommonOpts {
  std::string data;
  std::string target = "target";
  bool no_header = false;
  double split = 0.8;
  std::uint64_t seed = 0;
  std::size_t trees = 10;
  double lifetime = 1.0;
  double delta = 1.0;
  std::string out;
  std::string format = "json";
};

void add_data_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--data", o.data, "input CSV file")->required();
  cmd->add_option("--target", o.target, "target column name or 0-based index");
  cmd->add_flag("--no-header", o.no_header, "CSV has no header row");
  cmd->add_option("--split", o.split, "train fraction in (0,1)")->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed")->required();
  cmd->add_option("--out", o.out, "output path (stdout when omitted)");
  cmd->add_option("--format", o.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
}

json params_header(const CommonOpts& o) {
  return json{{"data", o.data},     {"target", o.target}, {"split", o.split},
              {"seed", o.seed},     {"trees", o.trees},   {"lifetime", o.lifetime},
              {"delta", o.delta},   {"format", o.format}};
}

std::string csv_provenance(const json& params) {
  std::string out;
  for (const auto& [key, value] : params.items())
    out += "# " + key + "=" + (value.is_string() ? value.get<std::string>() : value.dump()) +
           "\n";
  return out;
}

struct LoadedData {
  Dataset dataset;
  DataSplit split;
  Matrix x_train, x_val;
  std::vector<double> y_train, y_val;
  BoundedBox box;
};

LoadedData load(const CommonOpts& o) {
  LoadedData d;
  d.dataset = ingest_csv(o.data, o.target, !o.no_header);
  d.split = make_split(d.dataset.x.rows(), SplitSpec{o.split, o.seed});
  d.x_train = select_rows(d.dataset.x, d.split.train);
  d.x_val = select_rows(d.dataset.x, d.split.val);
  d.y_train = select(d.dataset.y, d.split.train);
  d.y_val = select(d.dataset.y, d.split.val);
  d.box = data_bounding_box(d.dataset.x);
  return d;
}

std::vector<MondrianTree> sample_trees(const BoundedBox& box, double lifetime,
                                       std::size_t count, std::uint64_t seed,
                                       std::uint64_t salt = 0) {
  std::vector<MondrianTree> trees(count);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t m = 0; m < count; ++m) {
    RngStream rng(seed, RngStream::stream_hash("tree", salt * 1'000'003 + m));
    trees[m] = sample_mondrian(box, lifetime, rng);
  }
  return trees;
}

// ---------------------------------------------------------------------------
// forest-path

int run_forest_path(const CommonOpts& o, const std::vector<double>& gaussian) {
  const LoadedData d = load(o);

  ForestOptions opt;
  opt.trees = o.trees;
  opt.lifetime = o.lifetime;
  opt.box = d.box;
  if (gaussian.empty()) {
    opt.params = default_gaussian_params(d.y_train);
  } else {
    if (gaussian.size() != 3)
      throw std::invalid_argument("--gaussian needs mu_prior,prior_var,noise_var");
    opt.params = GaussianParams{gaussian[0], gaussian[1], gaussian[2]};
  }
  const ForestModel model = train_forest(d.x_train, d.y_train, opt, o.seed);
  const std::vector<PathPoint> path =
      forward_path(model, d.x_train, d.y_train, d.x_val, d.y_val);

  json params = params_header(o);
  params["mu_prior"] = opt.params.prior_mean;
  params["prior_var"] = opt.params.prior_var;
  params["noise_var"] = opt.params.noise_var;

  if (o.format == "csv") {
    std::string text = csv_provenance(params) + "lifetime,rmse_train,rmse_val\n";
    for (const PathPoint& p : path)
      text += shortest(p.lifetime) + "," + shortest(p.rmse_train) + "," +
              shortest(p.rmse_val) + "\n";
    emit(text, o.out);
  } else {
    json arr = json::array();
    for (const PathPoint& p : path)
      arr.push_back(json{{"lifetime", p.lifetime},
                         {"rmse_train", p.rmse_train},
                         {"rmse_val", p.rmse_val}});
    emit(json{{"command", "forest-path"}, {"params", params}, {"path", arr}}.dump(2),
         o.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// kernel-path

int run_kernel_path(const CommonOpts& o) {
  const LoadedData d = load(o);
  const std::vector<MondrianTree> trees =
      sample_trees(d.box, o.lifetime, o.trees, o.seed);
  const std::vector<KernelPathPoint> path =
      backward_path(trees, d.dataset.x, d.dataset.y, d.split, o.delta);

  const json params = params_header(o);
  if (o.format == "csv") {
    std::string text = csv_provenance(params) + "lifetime,rmse_train,rmse_val,num_features\n";
    for (const KernelPathPoint& p : path)
      text += shortest(p.lifetime) + "," + shortest(p.rmse_train) + "," +
              shortest(p.rmse_val) + "," + std::to_string(p.num_features) + "\n";
    emit(text, o.out);
  } else {
    json arr = json::array();
    for (const KernelPathPoint& p : path)
      arr.push_back(json{{"lifetime", p.lifetime},
                         {"rmse_train", p.rmse_train},
                         {"rmse_val", p.rmse_val},
                         {"num_features", p.num_features}});
    emit(json{{"command", "kernel-path"}, {"params", params}, {"path", arr}}.dump(2),
         o.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// grid-search

int run_grid_search(const CommonOpts& o, const std::string& optimizer, std::size_t budget) {
  const LoadedData d = load(o);
  const LifetimeConfig config0{std::vector<double>(d.dataset.x.cols(), 0.0)};
  GridState state = init_grid(d.dataset.x, o.trees, config0, o.delta, d.dataset.y,
                              d.split, o.seed);
  const Optimizer opt =
      optimizer == "bidir" ? Optimizer::Bidirectional : Optimizer::Greedy;
  const std::vector<TracePoint> trace = run_search(state, opt, budget);

  json params = params_header(o);
  params.erase("lifetime");
  params["optimizer"] = optimizer;
  params["budget"] = budget;

  if (o.format == "csv") {
    std::string text = csv_provenance(params) + "step,rmse_val,move_dim,move_dir";
    for (std::size_t dd = 0; dd < d.dataset.x.cols(); ++dd)
      text += ",lambda" + std::to_string(dd);
    text += "\n";
    for (const TracePoint& p : trace) {
      text += std::to_string(p.step) + "," + shortest(p.rmse_val) + "," +
              std::to_string(p.move.dim) + "," +
              (p.move.dir == MoveDir::Increase ? "inc" : "dec");
      for (const double l : p.lambdas) text += "," + shortest(l);
      text += "\n";
    }
    emit(text, o.out);
  } else {
    json arr = json::array();
    for (const TracePoint& p : trace)
      arr.push_back(json{
          {"step", p.step},
          {"lambdas", p.lambdas},
          {"rmse_val", p.rmse_val},
          {"move",
           json{{"dim", p.move.dim},
                {"dir", p.move.dir == MoveDir::Increase ? "inc" : "dec"}}}});
    json doc{{"command", "grid-search"},
             {"params", params},
             {"trace", arr},
             {"selected_features", select_features(state.config)}};
    emit(doc.dump(2), o.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare-exact

int run_compare_exact(const CommonOpts& o, const std::vector<std::size_t>& m_list) {
  const LoadedData d = load(o);
  const std::vector<double> lifetimes(d.dataset.x.cols(), o.lifetime);

  // Exact Laplace-kernel ridge, one factorization reused across test points.
  const Matrix gram = laplace_gram(d.x_train, lifetimes);
  const KernelRidge exact(gram, d.y_train, o.delta);
  const Matrix cross = laplace_cross(d.x_val, d.x_train, lifetimes);
  double exact_sse = 0.0;
  for (std::size_t i = 0; i < d.x_val.rows(); ++i) {
    const double r = exact.predict(cross.row(i)) - d.y_val[i];
    exact_sse += r * r;
  }
  const double rmse_exact = std::sqrt(exact_sse / static_cast<double>(d.x_val.rows()));

  json rows = json::array();
  std::string csv = "m,rmse_approx,rmse_exact\n";
  for (std::size_t idx = 0; idx < m_list.size(); ++idx) {
    const std::vector<MondrianTree> trees =
        sample_trees(d.box, o.lifetime, m_list[idx], o.seed, idx + 1);
    const FeatureState state =
        build_features(trees, d.dataset.x, d.dataset.y, d.split, o.delta);
    const double rmse_approx = fit_eval(state).rmse_val;
    rows.push_back(json{{"m", m_list[idx]},
                        {"rmse_approx", rmse_approx},
                        {"rmse_exact", rmse_exact}});
    csv += std::to_string(m_list[idx]) + "," + shortest(rmse_approx) + "," +
           shortest(rmse_exact) + "\n";
  }

  json params = params_header(o);
  params["trees"] = m_list;
  if (o.format == "csv")
    emit(csv_provenance(params) + csv, o.out);
  else
    emit(json{{"command", "compare-exact"}, {"params", params}, {"table", rows}}.dump(2),
         o.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

int run_verify(const std::string& suite, std::uint64_t seed, double alpha,
               const std::string& out_path) {
  std::vector<std::string> lines;
  bool all_passed = true;

  const auto want = [&](const std::string& name) {
    return suite == "all" || suite == name;
  };

  if (want("poisson")) {
    std::vector<std::size_t> counts(10'000);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      RngStream rng(seed, RngStream::stream_hash("verify-poisson", i));
      counts[i] = sample_mondrian(BoundedBox({0.0}, {1.0}), 2.0, rng).cut_count();
    }
    const auto report = stats::poisson_gof(counts, 2.0, alpha);
    lines.push_back(stats::report_to_json_line(report));
    all_passed = all_passed && report.passed;
  }
  if (want("clocks")) {
    RngStream rng(seed, RngStream::stream_hash("verify-clocks", 0));
    const std::vector<double> rates{1.0, 3.0};
    const auto report = stats::clock_race(rates, 100'000, alpha, rng);
    lines.push_back(stats::report_to_json_line(report));
    all_passed = all_passed && report.passed;
  }
  if (want("memoryless")) {
    RngStream rng(seed, RngStream::stream_hash("verify-memoryless", 0));
    const auto report = stats::residual_memoryless(2.0, 0.5, 50'000, alpha, rng);
    lines.push_back(stats::report_to_json_line(report));
    all_passed = all_passed && report.passed;
  }
  if (want("kernel")) {
    RngStream rng(seed, RngStream::stream_hash("verify-kernel", 0));
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    for (int i = 0; i < 20; ++i)
      pairs.push_back({{rng.u01(), rng.u01()}, {rng.u01(), rng.u01()}});
    const std::vector<double> lifetimes{1.0, 1.0};
    const double deviation = stats::kernel_mc_report(pairs, 1000, lifetimes, seed);
    const bool passed = deviation <= 4.0;
    lines.push_back(json{{"name", "kernel_mc_report"},
                         {"max_deviation_se", deviation},
                         {"threshold", 4.0},
                         {"passed", passed},
                         {"n_samples", 1000}}
                        .dump());
    all_passed = all_passed && passed;
  }
  if (lines.empty())
    throw std::invalid_argument("verify: unknown suite '" + suite +
                                "' (poisson|clocks|memoryless|kernel|all)");

  std::string text;
  for (const std::string& line : lines) text += line + "\n";
  emit(text, out_path);
  if (!all_passed) throw VerifyFailure("verify: at least one check failed");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sample

BoundedBox parse_box(const std::string& spec) {
  std::vector<double> lo, hi;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("--box expects lo:hi pairs separated by commas");
    lo.push_back(std::stod(part.substr(0, colon)));
    hi.push_back(std::stod(part.substr(colon + 1)));
  }
  return BoundedBox(std::move(lo), std::move(hi));
}

int run_sample(const std::string& box_spec, double lifetime, std::uint64_t seed,
               const std::string& out_path) {
  RngStream rng(seed, RngStream::stream_hash("sample", 0));
  const MondrianTree tree = sample_mondrian(parse_box(box_spec), lifetime, rng);
  emit(tree_to_json(tree), out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap_from_env();

  CLI::App app{"Mondrian partitions: forest regression, Laplace-kernel random features,\n"
               "lifetime regularization paths, and per-dimension grid search"};
  app.require_subcommand(1);

  CommonOpts forest_opts;
  std::vector<double> gaussian;
  auto* forest = app.add_subcommand(
      "forest-path", "forward lifetime path of a Mondrian forest regressor");
  add_data_flags(forest, forest_opts);
  forest->add_option("--trees", forest_opts.trees, "number of trees")->capture_default_str();
  forest->add_option("--lifetime", forest_opts.lifetime, "terminal lifetime")
      ->capture_default_str();
  forest->add_option("--gaussian", gaussian,
                     "mu_prior,prior_var,noise_var (default: data-driven)")
      ->delimiter(',');

  CommonOpts kernel_opts;
  auto* kernel = app.add_subcommand(
      "kernel-path", "backward lifetime path of the Laplace-kernel approximation");
  add_data_flags(kernel, kernel_opts);
  kernel->add_option("--trees", kernel_opts.trees, "number of partitions")
      ->capture_default_str();
  kernel->add_option("--lifetime", kernel_opts.lifetime, "terminal lifetime")
      ->capture_default_str();
  kernel->add_option("--delta", kernel_opts.delta, "ridge regularization")
      ->capture_default_str();

  CommonOpts grid_opts;
  std::string optimizer = "greedy";
  std::size_t budget = 30;
  auto* grid = app.add_subcommand("grid-search",
                                  "greedy per-dimension lifetime configuration search");
  add_data_flags(grid, grid_opts);
  grid->add_option("--trees", grid_opts.trees, "number of grids")->capture_default_str();
  grid->add_option("--delta", grid_opts.delta, "ridge regularization")
      ->capture_default_str();
  grid->add_option("--optimizer", optimizer, "greedy|bidir")
      ->check(CLI::IsMember({"greedy", "bidir"}))
      ->capture_default_str();
  grid->add_option("--budget", budget, "maximum search steps")->capture_default_str();

  CommonOpts cmp_opts;
  std::vector<std::size_t> m_list{10, 50};
  auto* cmp = app.add_subcommand("compare-exact",
                                 "approximation RMSE against the exact Laplace kernel");
  add_data_flags(cmp, cmp_opts);
  cmp->add_option("--trees", m_list, "partition counts to evaluate, e.g. 5,20,80")
      ->delimiter(',');
  cmp->add_option("--lifetime", cmp_opts.lifetime, "kernel lifetime")
      ->capture_default_str();
  cmp->add_option("--delta", cmp_opts.delta, "ridge regularization")
      ->capture_default_str();

  std::string verify_suite = "all";
  std::uint64_t verify_seed = 0;
  double verify_alpha = 0.01;
  std::string verify_out;
  auto* verify = app.add_subcommand(
      "verify", "distributional checks (exit 3 when any fails)");
  verify->add_option("--suite", verify_suite, "poisson|clocks|memoryless|kernel|all")
      ->capture_default_str();
  verify->add_option("--seed", verify_seed, "master seed")->required();
  verify->add_option("--alpha", verify_alpha, "significance level")->capture_default_str();
  verify->add_option("--out", verify_out, "output path (stdout when omitted)");

  std::string box_spec;
  double sample_lifetime = 1.0;
  std::uint64_t sample_seed = 0;
  std::string sample_out;
  auto* sample = app.add_subcommand("sample", "draw one Mondrian partition as JSON");
  sample->add_option("--box", box_spec, "box as lo:hi,lo:hi,...")->required();
  sample->add_option("--lifetime", sample_lifetime, "lifetime")->capture_default_str();
  sample->add_option("--seed", sample_seed, "master seed")->required();
  sample->add_option("--out", sample_out, "output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
    if (forest->parsed()) return run_forest_path(forest_opts, gaussian);
    if (kernel->parsed()) return run_kernel_path(kernel_opts);
    if (grid->parsed()) return run_grid_search(grid_opts, optimizer, budget);
    if (cmp->parsed()) return run_compare_exact(cmp_opts, m_list);
    if (verify->parsed())
      return run_verify(verify_suite, verify_seed, verify_alpha, verify_out);
    if (sample->parsed())
      return run_sample(box_spec, sample_lifetime, sample_seed, sample_out);
    return kExitValidation;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const VerifyFailure& e) {
    std::cerr << e.what() << "\n";
    return kExitVerifyFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
