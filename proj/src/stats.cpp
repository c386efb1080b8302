#include "mondrian/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "mondrian/forest.hpp"
#include "mondrian/tree.hpp"

namespace mondrian::stats {

TestReport make_report(std::string name, double statistic, double p_value, double alpha,
                       std::size_t n_samples) {
  TestReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.p_value = p_value;
  r.alpha = alpha;
  r.passed = p_value >= alpha;
  r.n_samples = n_samples;
  return r;
}

std::string report_to_json_line(const TestReport& r) {
  nlohmann::json j{{"name", r.name},     {"statistic", r.statistic},
                   {"p_value", r.p_value}, {"alpha", r.alpha},
                   {"passed", r.passed},   {"n_samples", r.n_samples}};
  return j.dump();
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kPiSquared = kPi * kPi;

/// Regularized lower incomplete gamma by its series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Regularized upper incomplete gamma by continued fraction (x >= a + 1),
/// modified Lentz scheme.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_cf(a, x);
}

double chi_square_p_value(double statistic, std::size_t dof) {
  if (dof == 0) return 1.0;
  return gamma_q(static_cast<double>(dof) / 2.0, statistic / 2.0);
}

double ks_p_value(double d, double n_eff) {
  const double sq = std::sqrt(n_eff);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function dual, fast for small lambda where the alternating
    // series would need ~1/lambda terms.
    const double t = std::exp(-kPiSquared / (8.0 * lambda * lambda));
    const double p =
        std::sqrt(2.0 * kPi) / lambda * (t + std::pow(t, 9.0) + std::pow(t, 25.0));
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * lambda * lambda * k * k);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

std::pair<double, double> ks_statistic(std::vector<double> samples,
                                       const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return {d, ks_p_value(d, n)};
}

std::pair<double, double> ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double n_eff = na * nb / (na + nb);
  return {d, ks_p_value(d, n_eff)};
}

TestReport poisson_gof(std::span<const std::size_t> counts, double rate, double alpha) {
  if (counts.size() < 500)
    throw std::invalid_argument("poisson_gof: need at least 500 counts");
  if (!(rate > 0.0)) throw std::invalid_argument("poisson_gof: rate must be > 0");

  const double n = static_cast<double>(counts.size());
  std::size_t max_count = 0;
  for (const std::size_t c : counts) max_count = std::max(max_count, c);

  const auto log_pmf = [&](std::size_t k) {
    const double kd = static_cast<double>(k);
    return kd * std::log(rate) - rate - std::lgamma(kd + 1.0);
  };

  // Expected counts per value 0..max_count, plus the right tail.
  std::vector<double> expected(max_count + 2, 0.0);
  std::vector<double> observed(max_count + 2, 0.0);
  double tail_mass = 1.0;
  for (std::size_t k = 0; k <= max_count; ++k) {
    const double p = std::exp(log_pmf(k));
    expected[k] = n * p;
    tail_mass -= p;
  }
  expected[max_count + 1] = n * std::max(0.0, tail_mass);
  for (const std::size_t c : counts) observed[c] += 1.0;

  // Pool adjacent buckets until every expected count reaches 5.
  std::vector<double> exp_pooled, obs_pooled;
  double e_acc = 0.0, o_acc = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    e_acc += expected[k];
    o_acc += observed[k];
    if (e_acc >= 5.0) {
      exp_pooled.push_back(e_acc);
      obs_pooled.push_back(o_acc);
      e_acc = o_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (exp_pooled.empty()) {
      exp_pooled.push_back(e_acc);
      obs_pooled.push_back(o_acc);
    } else {
      exp_pooled.back() += e_acc;
      obs_pooled.back() += o_acc;
    }
  }

  double stat = 0.0;
  for (std::size_t k = 0; k < exp_pooled.size(); ++k) {
    const double diff = obs_pooled[k] - exp_pooled[k];
    stat += diff * diff / exp_pooled[k];
  }
  const std::size_t dof = exp_pooled.size() > 1 ? exp_pooled.size() - 1 : 1;
  return make_report("poisson_gof", stat, chi_square_p_value(stat, dof), alpha,
                     counts.size());
}

TestReport clock_race(std::span<const double> rates, std::size_t trials, double alpha,
                      RngStream& rng) {
  if (rates.size() < 2) throw std::invalid_argument("clock_race: need at least 2 rates");
  if (trials < 10'000) throw std::invalid_argument("clock_race: need at least 1e4 trials");
  double total_rate = 0.0;
  for (const double r : rates) {
    if (!(r > 0.0)) throw std::invalid_argument("clock_race: rates must be > 0");
    total_rate += r;
  }

  std::vector<double> winner_counts(rates.size(), 0.0);
  std::vector<double> minima(trials, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      const double z = rng.exponential(rates[i]);
      if (z < best) {
        best = z;
        best_idx = i;
      }
    }
    winner_counts[best_idx] += 1.0;
    minima[t] = best;
  }

  double chi2 = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double expected = static_cast<double>(trials) * rates[i] / total_rate;
    const double diff = winner_counts[i] - expected;
    chi2 += diff * diff / expected;
  }
  const double p_winners = chi_square_p_value(chi2, rates.size() - 1);
  const auto [d, p_min] =
      ks_statistic(std::move(minima), [&](double x) { return exp_cdf(total_rate, x); });
  (void)d;
  return make_report("clock_race", chi2, std::min(p_winners, p_min), alpha, trials);
}

TestReport residual_memoryless(double rate, double threshold, std::size_t trials,
                               double alpha, RngStream& rng) {
  if (!(rate > 0.0)) throw std::invalid_argument("residual_memoryless: rate must be > 0");
  if (!(threshold >= 0.0))
    throw std::invalid_argument("residual_memoryless: threshold must be >= 0");
  const double expected_survivors =
      static_cast<double>(trials) * std::exp(-rate * threshold);
  if (expected_survivors < 1000.0)
    throw std::invalid_argument("residual_memoryless: too few expected survivors; "
                                "increase trials");

  std::vector<double> residuals;
  residuals.reserve(static_cast<std::size_t>(expected_survivors * 1.2));
  for (std::size_t t = 0; t < trials; ++t) {
    const double z = rng.exponential(rate);
    if (z > threshold) residuals.push_back(z - threshold);
  }
  const auto [d, p] =
      ks_statistic(std::move(residuals), [&](double x) { return exp_cdf(rate, x); });
  return make_report("residual_memoryless", d, p, alpha, trials);
}

double kernel_mc_report(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
    std::size_t num_partitions, std::span<const double> lifetimes, std::uint64_t seed) {
  if (num_partitions < 30)
    throw std::invalid_argument("kernel_mc_report: need at least 30 partitions");
  if (pairs.empty()) return 0.0;
  const std::size_t dims = lifetimes.size();

  // Rescale each dimension by its lifetime; a unit-lifetime partition of the
  // scaled points then has same-cell probability exp(-sum lambda_d |dx_d|).
  Matrix scaled(pairs.size() * 2, dims);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t d = 0; d < dims; ++d) {
      scaled(2 * p, d) = lifetimes[d] * pairs[p].first[d];
      scaled(2 * p + 1, d) = lifetimes[d] * pairs[p].second[d];
    }
  const BoundedBox box = data_bounding_box(scaled);

  std::vector<std::size_t> same(pairs.size(), 0);
#pragma omp parallel
  {
    std::vector<std::size_t> local(pairs.size(), 0);
#pragma omp for schedule(dynamic)
    for (std::size_t m = 0; m < num_partitions; ++m) {
      RngStream rng(seed, RngStream::stream_hash("mc-tree", m));
      const MondrianTree tree = sample_mondrian(box, 1.0, rng);
      for (std::size_t p = 0; p < pairs.size(); ++p)
        if (leaf_of(tree, scaled.row(2 * p)) == leaf_of(tree, scaled.row(2 * p + 1)))
          local[p] += 1;
    }
#pragma omp critical
    for (std::size_t p = 0; p < pairs.size(); ++p) same[p] += local[p];
  }

  double worst = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    double dist = 0.0;
    for (std::size_t d = 0; d < dims; ++d)
      dist += std::abs(scaled(2 * p, d) - scaled(2 * p + 1, d));
    const double exact = std::exp(-dist);
    const double empirical =
        static_cast<double>(same[p]) / static_cast<double>(num_partitions);
    if (empirical == exact) continue;
    const double se =
        std::sqrt(exact * (1.0 - exact) / static_cast<double>(num_partitions));
    const double dev = se > 0.0 ? std::abs(empirical - exact) / se
                                : std::numeric_limits<double>::infinity();
    worst = std::max(worst, dev);
  }
  return worst;
}

}  // namespace mondrian::stats
