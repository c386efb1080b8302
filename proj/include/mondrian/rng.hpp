#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace mondrian {

/**
 * Seeded, streamed PRNG (xoshiro256++ seeded via splitmix64).
 *
 * All randomness in the library flows through RngStream so that results are
 * reproducible across platforms and compilers: the generator and all variate
 * transforms are implemented here, never delegated to <random> distributions
 * (whose output is implementation-defined).
 *
 * A stream is identified by (seed, stream_id). Identical pairs reproduce
 * identical draws; distinct stream_ids give statistically independent
 * streams, so independent work units (trees, grids) can be sampled in
 * parallel deterministically.
 */
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t x = seed ^ (stream_id * 0x9E3779B97F4A7C15ull);
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [a, b).
  double uniform(double a, double b) { return a + u01() * (b - a); }

  /// Uniform draw strictly inside (a, b); retries boundary hits.
  double uniform_open(double a, double b) {
    for (;;) {
      const double x = uniform(a, b);
      if (x > a && x < b) return x;
    }
  }

  /// Exp(rate) via inverse CDF, U uniform on (0, 1].
  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    return exp_from_uniform(rate, 1.0 - u01());
  }

  /// Inverse-CDF transform -ln(u)/rate for u in (0, 1]. Exposed for tests
  /// that pin the uniform draw.
  static double exp_from_uniform(double rate, double u) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    return -std::log(u) / rate;
  }

  /// FNV-1a hash of (name, index); used to derive component stream ids from
  /// a single master seed.
  static std::uint64_t stream_hash(std::string_view name, std::uint64_t index) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    h ^= index;
    h *= 0x100000001b3ull;
    return h;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t state_[4];
};

}  // namespace mondrian
