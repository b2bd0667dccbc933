#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace bandit {

/// Seeded random source. All sampling in the toolkit goes through this so a
/// single seed reproduces a run.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  /// Index drawn from a probability vector by inverse CDF.
  std::size_t categorical(std::span<const double> probs);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a stage offset.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t offset);

}  // namespace bandit
