#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace ensemblekit {

// PCG32 (XSH-RR output over a 64-bit LCG state). The integer stream is
// fully specified, so a given (seed, stream) yields the same draws on every
// platform. All distributions below are implemented here rather than taken
// from <random>, whose distributions are implementation-defined.
class Rng {
 public:
  using result_type = std::uint32_t;

  static constexpr std::uint64_t kDefaultStream = 0xda3e39cb94b95bdbULL;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = kDefaultStream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform on {0, ..., n-1} by rejection; n must be >= 1.
  std::uint32_t uniform_index(std::uint32_t n);

  // Standard normal by Box-Muller.
  double normal();

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(static_cast<std::uint32_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u32(); }

  bool operator==(const Rng&) const = default;

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

// Mixes a master seed with a stream label through splitmix64. Used to hand
// every tree and epoch its own seed, so work can be reordered or run
// in parallel without changing any draw.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace ensemblekit
