#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace specmap {

/// Seeded random stream. Every stochastic operation draws from its own
/// labelled substream of the scenario seed, so adding a new consumer never
/// shifts the draws of existing ones. The engine is std::mt19937_64, whose
/// output sequence is fixed by the C++ standard; uniform and normal variates
/// are derived here rather than through <random> distributions, which are
/// implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view label);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller).
  double normal();

  static std::uint64_t substream_seed(std::uint64_t seed, std::string_view label);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s);

}  // namespace specmap
