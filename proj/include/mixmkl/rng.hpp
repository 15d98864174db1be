#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include <Eigen/Core>

#include "mixmkl/error.hpp"

namespace mixmkl {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Folds one tag word into a stream key (hash-combine flavoured).
constexpr std::uint64_t fold(std::uint64_t key, std::uint64_t word) noexcept {
  return mix64(key ^ (word + kGolden + (key << 6) + (key >> 2)));
}

constexpr std::uint64_t derive_key(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t k = mix64(seed + kGolden);
  for (std::uint64_t t : tags) k = fold(k, t);
  return k;
}

// Stream tags. Each logical purpose gets its own tag so that edits to one
// consumer never shift the draws seen by another.
inline constexpr std::uint64_t kTagAssign = 0x617373696e75ULL;
inline constexpr std::uint64_t kTagState = 0x7374617465ULL;
inline constexpr std::uint64_t kTagLabel = 0x6c6162656cULL;
inline constexpr std::uint64_t kTagTrial = 0x747269616cULL;
inline constexpr std::uint64_t kTagPilot = 0x70696c6f74ULL;
inline constexpr std::uint64_t kTagEps = 0x657073ULL;
inline constexpr std::uint64_t kTagRun = 0x72756eULL;

// Counter-based stream: the i-th draw is mix64(key + i*golden), i.e. SplitMix64
// with the stream key as initial state. Keyed draws are reproducible and
// order-independent across streams.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept
      : key_(derive_key(seed, tags)) {}

  std::uint64_t next_u64() noexcept {
    counter_ += 1;
    return mix64(key_ + counter_ * kGolden);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // +1 or -1 with equal probability.
  int next_sign() noexcept { return (next_u64() >> 63) ? 1 : -1; }

  // Index sampled by inverse CDF over `probs` (assumed non-negative, sum ~ 1).
  int next_categorical(const Eigen::VectorXd& probs) noexcept {
    const double u = next_unit();
    double acc = 0.0;
    const int n = static_cast<int>(probs.size());
    for (int i = 0; i < n; ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return n - 1;  // fp leftovers land on the last state
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) noexcept {
    return next_u64() % n;
  }

  // Exp(1) variate.
  double next_exponential() noexcept {
    double u = next_unit();
    if (u <= 0.0) u = 0x1.0p-53;
    return -std::log(u);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace mixmkl
