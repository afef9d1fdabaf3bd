#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "cpomdp/core.hpp"

namespace cpomdp {

/// Seeded random source used by every stochastic routine. The
/// generator and the bits-to-double mapping are pinned so that a seed
/// reproduces byte-identical streams across platforms; the identifier
/// below is stamped into experiment manifests.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64-canonical53";

  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits, independent of any
  /// library distribution implementation.
  double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

  std::uint64_t bits() { return gen_(); }

  /// Index sampled from an (approximately normalized) weight vector by
  /// walking the cumulative sum. Falls back to the last positive-weight
  /// index if rounding pushes the draw past the total.
  std::size_t categorical(std::span<const double> weights) {
    double u = uniform01();
    double acc = 0.0;
    std::size_t last = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last = i;
      acc += weights[i];
      if (u < acc) return i;
    }
    if (last == weights.size()) {
      throw ValidationError("categorical weights are all zero");
    }
    return last;
  }

  /// Deterministic per-stream seed derived from a base seed, so
  /// episode k is reproducible in isolation. SplitMix64 finalizer.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

/// Uniform sample from the probability simplex of the given dimension
/// (normalized exponential draws).
inline std::vector<double> sample_simplex(Rng& rng, std::size_t dim) {
  std::vector<double> p(dim);
  double sum = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double u = rng.uniform01();
    p[i] = -std::log1p(-u);  // Exp(1), finite since u < 1
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace cpomdp
