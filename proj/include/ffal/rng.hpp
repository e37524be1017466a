#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ffal {

/// Stateless splitmix64 finalizer; also used to mix seeds and hash round ids.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent 64-bit seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// xoshiro256** 1.0 seeded through splitmix64. Every sampling routine below is
/// implemented here rather than via <random> distributions, whose outputs are
/// not specified bit-for-bit across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Unbiased uniform integer in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);
  /// Standard normal via Box-Muller.
  double normal() noexcept;

  /// m distinct values from [0, n) in sampling order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ffal
