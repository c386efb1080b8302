#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>

namespace mondrian {

/// Conjugate Gaussian cell model: fixed-noise likelihood around an unknown
/// mean with a Gaussian prior on it. A prior is mandatory (p_prior = 0 would
/// leave empty cells with an undefined posterior); use a very large prior
/// variance to approximate "no prior".
struct GaussianParams {
  double prior_mean = 0.0;
  double prior_var = 1.0;
  double noise_var = 1.0;

  double prior_precision() const { return 1.0 / prior_var; }
  double noise_precision() const { return 1.0 / noise_var; }

  void validate() const {
    if (!std::isfinite(prior_mean))
      throw std::invalid_argument("GaussianParams: prior_mean must be finite");
    if (!(prior_var > 0.0) || !std::isfinite(prior_var))
      throw std::invalid_argument("GaussianParams: prior_var must be positive and finite");
    if (!(noise_var > 0.0) || !std::isfinite(noise_var))
      throw std::invalid_argument("GaussianParams: noise_var must be positive and finite");
  }
};

/// Sufficient statistics of one partition cell; the posterior is recomputed
/// from (count, sum_y) on demand.
struct LeafStats {
  std::size_t count = 0;
  double sum_y = 0.0;
};

/// Posterior (mean, variance) of the cell mean given `count` observations
/// summing to `sum_y`. With no data this is the prior.
inline std::pair<double, double> gaussian_posterior(const GaussianParams& p,
                                                    std::size_t count, double sum_y) {
  const double pp = p.prior_precision();
  const double pn = p.noise_precision();
  const double precision = pp + static_cast<double>(count) * pn;
  return {(pp * p.prior_mean + pn * sum_y) / precision, 1.0 / precision};
}

inline std::pair<double, double> gaussian_posterior(const GaussianParams& p,
                                                    std::span<const double> targets) {
  double sum = 0.0;
  for (const double y : targets) sum += y;
  return gaussian_posterior(p, targets.size(), sum);
}

}  // namespace mondrian
