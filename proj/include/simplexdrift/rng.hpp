#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace simplexdrift {

// All stochastic code draws through these helpers so that output streams
// depend only on the seed, never on the standard library's distribution
// implementations.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Independent substream for parallel work units (chains, restarts).
// SplitMix64 scrambling keeps nearby (seed, stream) pairs uncorrelated.
inline Rng substream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  auto mix = [](std::uint64_t v) {
    v ^= v >> 30;
    v *= 0xbf58476d1ce4e5b9ULL;
    v ^= v >> 27;
    v *= 0x94d049bb133111ebULL;
    v ^= v >> 31;
    return v;
  };
  std::seed_seq seq{mix(x), mix(x + 1), mix(x + 2), mix(x + 3)};
  return Rng(seq);
}

// Uniform on [0, 1).
inline double runif(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1]; safe to take log of.
inline double runif_pos(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

inline double runif(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * runif(rng);
}

// Standard normal via Box-Muller; no cached spare, so the stream position
// is a pure function of the number of draws.
inline double rnorm(Rng& rng) {
  double u1 = runif_pos(rng);
  double u2 = runif(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 boosted through
// the U^(1/shape) identity.
inline double rgamma(Rng& rng, double shape) {
  if (shape < 1.0) {
    double u = runif_pos(rng);
    return rgamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rnorm(rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = runif_pos(rng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

inline double rbeta(Rng& rng, double a, double b) {
  double x = rgamma(rng, a);
  double y = rgamma(rng, b);
  return x / (x + y);
}

}  // namespace simplexdrift
