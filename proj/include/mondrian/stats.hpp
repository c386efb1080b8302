#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mondrian/matrix.hpp"
#include "mondrian/rng.hpp"

namespace mondrian::stats {

/// Outcome of one hypothesis test. passed <=> p_value >= alpha.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 0.0;
  double alpha = 0.0;
  bool passed = false;
  std::size_t n_samples = 0;
};

TestReport make_report(std::string name, double statistic, double p_value, double alpha,
                       std::size_t n_samples);

/// One JSON object per line, for the CLI verify command.
std::string report_to_json_line(const TestReport& report);

/// Regularized upper incomplete gamma Q(a, x); the chi-square upper tail is
/// Q(df/2, stat/2).
double gamma_q(double a, double x);

double chi_square_p_value(double statistic, std::size_t dof);

/// Asymptotic Kolmogorov-Smirnov p-value for statistic d with effective
/// sample size n_eff.
double ks_p_value(double d, double n_eff);

/// One-sample KS against a CDF. Samples need not be sorted.
std::pair<double, double> ks_statistic(std::vector<double> samples,
                                       const std::function<double(double)>& cdf);

/// Two-sample KS.
std::pair<double, double> ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Chi-square goodness of fit of integer counts against Poisson(rate), with
/// adjacent buckets pooled so every expected count is >= 5. Requires at
/// least 500 counts.
TestReport poisson_gof(std::span<const std::size_t> counts, double rate, double alpha);

/// Competing exponential clocks: chi-square of winner frequencies against
/// rate proportions AND a KS fit of the minimum times against Exp(sum rates).
/// Both sub-tests must pass; the reported p-value is their minimum.
TestReport clock_race(std::span<const double> rates, std::size_t trials, double alpha,
                      RngStream& rng);

/// Lack-of-memory check: KS fit of the shifted survivors {Z - t : Z > t}
/// against Exp(rate).
TestReport residual_memoryless(double rate, double threshold, std::size_t trials,
                               double alpha, RngStream& rng);

/// Monte Carlo check of the random-feature kernel estimate: for each point
/// pair, the same-cell frequency over M sampled partitions is compared with
/// the Laplace kernel value; returns the largest |empirical - exact| in
/// binomial standard-error units.
double kernel_mc_report(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                        std::size_t num_partitions, std::span<const double> lifetimes,
                        std::uint64_t seed);

inline double exp_cdf(double rate, double x) {
  return x <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * x);
}

}  // namespace mondrian::stats
