#pragma once

// Portable seeded generator so every implementation reproduces the same
// streams bit-for-bit.
//
//   splitmix64(x):  z = x + 0x9E3779B97F4A7C15
//                   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                   return z ^ (z >> 31)
//
//   xorshift64* step (state x != 0):
//                   x ^= x >> 12; x ^= x << 25; x ^= x >> 27
//                   return x * 0x2545F4914F6CDD1D
//
//   uniform double in [0,1): (next() >> 11) * 2^-53
//
// A Monte Carlo episode (start state s, episode index e, run seed q) uses
// the stream seeded with splitmix64(splitmix64(q ^ splitmix64(s)) + e).

#include <cstdint>

namespace buchi_dp {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Xorshift64Star {
 public:
  explicit constexpr Xorshift64Star(std::uint64_t seed) noexcept
      : state_(seed != 0 ? seed : 0x9E3779B97F4A7C15ULL) {}

  constexpr std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t episode_seed(std::uint64_t run_seed, std::uint64_t start_state,
                                            std::uint64_t episode) noexcept {
  return splitmix64(splitmix64(run_seed ^ splitmix64(start_state)) + episode);
}

}  // namespace buchi_dp
