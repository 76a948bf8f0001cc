#include "ensemblekit/rng.hpp"

#include <cmath>
#include <numbers>

#include "ensemblekit/error.hpp"

namespace ensemblekit {

namespace {

constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  // Reference pcg32_srandom_r seeding sequence.
  state_ = 0;
  inc_ = (stream << 1u) | 1u;
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t Rng::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * kMultiplier + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  const auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((-rot) & 31u));
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32u) | next_u32();
}

double Rng::uniform01() {
  const std::uint64_t a = next_u32() >> 5u;  // 27 bits
  const std::uint64_t b = next_u32() >> 6u;  // 26 bits
  return static_cast<double>(a * 67108864ULL + b) * 0x1.0p-53;
}

std::uint32_t Rng::uniform_index(std::uint32_t n) {
  if (n == 0) throw ContractError("uniform_index: empty range");
  const std::uint32_t threshold = (0u - n) % n;
  for (;;) {
    const std::uint32_t r = next_u32();
    if (r >= threshold) return r % n;
  }
}

double Rng::normal() {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

}  // namespace ensemblekit
