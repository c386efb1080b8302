#include <doctest.h>

#include <cmath>
#include <vector>

#include <json.hpp>

#include "mondrian/rng.hpp"
#include "mondrian/stats.hpp"

using namespace mondrian;
using namespace mondrian::stats;

namespace {

/// Poisson(mean) draw: arrivals of a unit-rate process within [0, mean].
std::size_t poisson_draw(double mean, RngStream& rng) {
  std::size_t k = 0;
  double t = rng.exponential(1.0);
  while (t <= mean) {
    ++k;
    t += rng.exponential(1.0);
  }
  return k;
}

}  // namespace

TEST_CASE("gamma_q and chi-square tail") {
  // With 2 degrees of freedom the chi-square tail is exp(-x/2).
  for (const double x : {0.5, 1.0, 3.0, 7.0})
    CHECK(chi_square_p_value(x, 2) == doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-10));
  CHECK(chi_square_p_value(0.0, 5) == 1.0);
  CHECK(gamma_q(2.5, 40.0) < 1e-10);
  CHECK_THROWS_AS(gamma_q(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("ks_p_value extremes") {
  CHECK(ks_p_value(0.001, 100.0) > 0.99);
  CHECK(ks_p_value(0.5, 10'000.0) < 1e-10);
}

TEST_CASE("ks_statistic") {
  SUBCASE("well-fitted exponential passes") {
    RngStream rng(120, 0);
    std::vector<double> samples(20'000);
    for (auto& s : samples) s = rng.exponential(2.0);
    const auto [d, p] = ks_statistic(samples, [](double x) { return exp_cdf(2.0, x); });
    (void)d;
    CHECK(p >= 0.01);
  }

  SUBCASE("shifted samples are rejected") {
    RngStream rng(121, 0);
    std::vector<double> samples(20'000);
    for (auto& s : samples) s = rng.exponential(1.0) + 0.3;
    const auto [d, p] = ks_statistic(samples, [](double x) { return exp_cdf(1.0, x); });
    (void)d;
    CHECK(p < 0.01);
  }

  SUBCASE("two-sample test on equal and unequal distributions") {
    RngStream rng(122, 0);
    std::vector<double> a(8000), b(8000), c(8000);
    for (auto& s : a) s = rng.exponential(1.5);
    for (auto& s : b) s = rng.exponential(1.5);
    for (auto& s : c) s = rng.exponential(2.5);
    CHECK(ks_two_sample(a, b).second >= 0.01);
    CHECK(ks_two_sample(a, c).second < 0.01);
  }
}

TEST_CASE("poisson_gof") {
  SUBCASE("true Poisson(2) counts pass nearly always") {
    int passes = 0;
    for (int meta = 0; meta < 100; ++meta) {
      RngStream rng(123, meta);
      std::vector<std::size_t> counts(10'000);
      for (auto& c : counts) c = poisson_draw(2.0, rng);
      passes += poisson_gof(counts, 2.0, 0.01).passed;
    }
    CHECK(passes >= 98);
  }

  SUBCASE("all-zero counts against rate 5 fail") {
    const std::vector<std::size_t> zeros(1000, 0);
    const TestReport report = poisson_gof(zeros, 5.0, 0.01);
    CHECK_FALSE(report.passed);
    CHECK(report.p_value < 1e-6);
  }

  SUBCASE("calibration: rejection rate under the null is near alpha") {
    const double alpha = 0.05;
    int rejects = 0;
    const int meta_trials = 300;
    for (int meta = 0; meta < meta_trials; ++meta) {
      RngStream rng(124, meta);
      std::vector<std::size_t> counts(2000);
      for (auto& c : counts) c = poisson_draw(3.0, rng);
      rejects += !poisson_gof(counts, 3.0, alpha).passed;
    }
    const double rate = static_cast<double>(rejects) / meta_trials;
    CHECK(rate > alpha / 3.0);
    CHECK(rate < alpha * 3.0);
  }

  SUBCASE("too few counts rejected") {
    const std::vector<std::size_t> counts(100, 1);
    CHECK_THROWS_AS(poisson_gof(counts, 1.0, 0.01), std::invalid_argument);
  }
}

TEST_CASE("clock_race and residual_memoryless calibration under the null") {
  const double alpha = 0.05;
  const int meta_trials = 300;

  int race_rejects = 0, residual_rejects = 0;
  for (int meta = 0; meta < meta_trials; ++meta) {
    RngStream rng_a(140, meta);
    const std::vector<double> rates{1.0, 2.5};
    race_rejects += !clock_race(rates, 10'000, alpha, rng_a).passed;
    RngStream rng_b(141, meta);
    residual_rejects += !residual_memoryless(1.0, 0.3, 3000, alpha, rng_b).passed;
  }
  const double race_rate = static_cast<double>(race_rejects) / meta_trials;
  const double residual_rate = static_cast<double>(residual_rejects) / meta_trials;
  CHECK(race_rate > alpha / 3.0);
  CHECK(race_rate < alpha * 3.0);
  CHECK(residual_rate > alpha / 3.0);
  CHECK(residual_rate < alpha * 3.0);
}

TEST_CASE("clock_race") {
  SUBCASE("equal rates pass and split the wins evenly") {
    RngStream rng(125, 0);
    const std::vector<double> rates{1.0, 1.0};
    const TestReport report = clock_race(rates, 20'000, 0.01, rng);
    CHECK(report.passed);
  }

  SUBCASE("winner frequency matches the rate proportion") {
    // Simulate the race directly: the faster clock (rate 3 of total 4) should
    // win three quarters of the time.
    RngStream rng(126, 0);
    const std::size_t trials = 100'000;
    std::size_t wins2 = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double z1 = rng.exponential(1.0);
      const double z2 = rng.exponential(3.0);
      wins2 += z2 < z1;
    }
    const double freq = static_cast<double>(wins2) / trials;
    const double se = std::sqrt(0.75 * 0.25 / trials);
    CHECK(std::abs(freq - 0.75) < 3.0 * se);
  }

  SUBCASE("minimum of rates (2,3) has mean 1/5") {
    RngStream rng(127, 0);
    const std::size_t trials = 100'000;
    double sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t)
      sum += std::min(rng.exponential(2.0), rng.exponential(3.0));
    const double mean = sum / trials;
    const double se = 0.2 / std::sqrt(static_cast<double>(trials));
    CHECK(std::abs(mean - 0.2) < 3.0 * se);
  }

  SUBCASE("report passes for (1,3) and is deterministic given the seed") {
    RngStream rng_a(128, 0), rng_b(128, 0);
    const std::vector<double> rates{1.0, 3.0};
    const TestReport a = clock_race(rates, 100'000, 0.01, rng_a);
    const TestReport b = clock_race(rates, 100'000, 0.01, rng_b);
    CHECK(a.passed);
    CHECK(a.statistic == b.statistic);
    CHECK(a.p_value == b.p_value);
  }

  SUBCASE("input validation") {
    RngStream rng(129, 0);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(clock_race(one, 20'000, 0.01, rng), std::invalid_argument);
    const std::vector<double> bad{1.0, -2.0};
    CHECK_THROWS_AS(clock_race(bad, 20'000, 0.01, rng), std::invalid_argument);
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(clock_race(two, 100, 0.01, rng), std::invalid_argument);
  }
}

TEST_CASE("residual_memoryless") {
  SUBCASE("threshold zero degenerates to a plain exponential fit") {
    RngStream rng(130, 0);
    CHECK(residual_memoryless(1.0, 0.0, 20'000, 0.01, rng).passed);
  }

  SUBCASE("survivors beyond the threshold keep the exponential law") {
    RngStream rng(131, 0);
    CHECK(residual_memoryless(2.0, 0.5, 50'000, 0.01, rng).passed);
  }

  SUBCASE("too few expected survivors rejected") {
    RngStream rng(132, 0);
    CHECK_THROWS_AS(residual_memoryless(1.0, 10.0, 20'000, 0.01, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("kernel_mc_report") {
  using Pair = std::pair<std::vector<double>, std::vector<double>>;

  SUBCASE("identical pair deviates by zero") {
    const std::vector<Pair> pairs{{{0.3, 0.4}, {0.3, 0.4}}};
    const std::vector<double> lifetimes{1.0, 1.0};
    CHECK(kernel_mc_report(pairs, 64, lifetimes, 7) == 0.0);
  }

  SUBCASE("zero lifetimes deviate by zero") {
    const std::vector<Pair> pairs{{{0.1, 0.2}, {0.9, 0.8}}};
    const std::vector<double> lifetimes{0.0, 0.0};
    CHECK(kernel_mc_report(pairs, 64, lifetimes, 8) == 0.0);
  }

  SUBCASE("random pairs stay within a few standard errors") {
    RngStream rng(133, 0);
    std::vector<Pair> pairs;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> a{rng.u01(), rng.u01()}, b{rng.u01(), rng.u01()};
      pairs.emplace_back(std::move(a), std::move(b));
    }
    const std::vector<double> lifetimes{1.0, 1.0};
    CHECK(kernel_mc_report(pairs, 1000, lifetimes, 9) <= 4.0);
  }

  SUBCASE("needs at least 30 partitions") {
    const std::vector<Pair> pairs{{{0.0}, {1.0}}};
    const std::vector<double> lifetimes{1.0};
    CHECK_THROWS_AS(kernel_mc_report(pairs, 10, lifetimes, 1), std::invalid_argument);
  }
}

TEST_CASE("TestReport invariants and JSON") {
  const TestReport report = make_report("example", 1.5, 0.2, 0.01, 1000);
  CHECK(report.passed == (report.p_value >= report.alpha));
  const auto parsed = nlohmann::json::parse(report_to_json_line(report));
  CHECK(parsed.at("name") == "example");
  CHECK(parsed.at("statistic") == 1.5);
  CHECK(parsed.at("p_value") == 0.2);
  CHECK(parsed.at("alpha") == 0.01);
  CHECK(parsed.at("passed") == true);
  CHECK(parsed.at("n_samples") == 1000);
}
