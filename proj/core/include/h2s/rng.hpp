#ifndef H2S_RNG_HPP
#define H2S_RNG_HPP

#include <cmath>
#include <cstdint>

#include "h2s/errors.hpp"

// Random number generation with a fully pinned-down bit stream.
//
// Every draw in this project must reproduce bit-exactly given a seed,
// independent of worker count, scheduling and platform. The standard
// <random> engines are exactly specified but the distributions are not,
// so both the engine (xoshiro256++) and the variate transforms
// (Box-Muller normal, Marsaglia-Tsang gamma) are implemented here.

namespace h2s {

/// splitmix64 step; the avalanche stage doubles as a 64-bit mixing function.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent substream seed from (seed, k1, k2).
///
/// This is the documented mixing function behind all per-group and
/// per-(group, iteration) streams: two rounds of the splitmix64
/// avalanche, folding in each key offset by the golden-ratio constant.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64_next(s);
  s = h ^ (k1 + 0x9e3779b97f4a7c15ULL);
  h = splitmix64_next(s);
  s = h ^ (k2 + 0x9e3779b97f4a7c15ULL);
  return splitmix64_next(s);
}

/// Stream-domain keys. Data generation and each sampler derive their
/// substreams under a distinct domain so that reusing one master seed
/// across pipeline steps never replays a bit stream.
namespace seed_domain {
inline constexpr std::uint64_t simulate = 0x5105;
inline constexpr std::uint64_t full_gibbs = 0xF071;
inline constexpr std::uint64_t stage1 = 0x51A6E1;
inline constexpr std::uint64_t stage2 = 0x51A6E2;
}  // namespace seed_domain

/// xoshiro256++ engine (Blackman & Vigna), seeded via splitmix64.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
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

private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

/// Uniform double in [0, 1), 53-bit resolution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1]; safe as a log() argument.
inline double uniform01_open(Rng& rng) {
  return 1.0 - uniform01(rng);
}

/// Uniform index in [0, n). Truncation bias is O(2^-53), irrelevant here.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n));
}

/// Standard normal draw via Box-Muller (cosine branch, no cached state).
inline double draw_standard_normal(Rng& rng) {
  const double u1 = uniform01_open(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline double draw_normal(Rng& rng, double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw domain_error("draw_normal: variance must be positive and finite");
  }
  return mean + std::sqrt(variance) * draw_standard_normal(rng);
}

/// Gamma(shape, scale 1) via Marsaglia-Tsang; shape < 1 boosted through
/// the Gamma(shape+1) draw times U^(1/shape).
inline double draw_standard_gamma(Rng& rng, double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw domain_error("draw_standard_gamma: shape must be positive and finite");
  }
  if (shape < 1.0) {
    const double u = uniform01_open(rng);
    return draw_standard_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = draw_standard_normal(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = uniform01_open(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Gamma with rate parameterization: density ~ x^(shape-1) exp(-rate x).
inline double draw_gamma(Rng& rng, double shape, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw domain_error("draw_gamma: rate must be positive and finite");
  }
  return draw_standard_gamma(rng, shape) / rate;
}

/// Inverse-Gamma(shape, rate) as the reciprocal of a Gamma(shape, rate) draw.
inline double draw_inv_gamma(Rng& rng, double shape, double rate) {
  return 1.0 / draw_gamma(rng, shape, rate);
}

}  // namespace h2s

#endif
