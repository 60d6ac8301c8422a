#pragma once

#include <cstdint>
#include <limits>

namespace cams {

// Counter-based pseudo-random generator with explicit stream splitting.
//
// Every output is a stateless hash of (key, counter), so a generator can be
// split into independent child streams by address alone: derive(tag) mixes
// the tag into the key without consuming any draws from the parent. All
// experiment randomness is addressed this way, e.g. the i-th pool member
// uses SplitRng(seed).derive(kStreamPool, i), which makes results identical
// no matter in which order (or on how many threads) the members are built.
//
// The output function is the SplitMix64 finalizer over a Weyl sequence,
// which passes the usual statistical batteries and is exactly reproducible
// across platforms (no library distributions involved).
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc908ull)) {}

  // Independent child stream. derive(a, b) != derive(b, a).
  SplitRng derive(std::uint64_t tag) const {
    return SplitRng(mix(key_ ^ (0xd1342543de82ef95ull * (tag + 0x632be59bd9b4e019ull))), RawKey{});
  }
  SplitRng derive(std::uint64_t tag_a, std::uint64_t tag_b) const {
    return derive(tag_a).derive(tag_b);
  }

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform integer in [lo, hi], both ends inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  struct RawKey {};
  SplitRng(std::uint64_t key, RawKey) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream tags used by the experiment pipeline (documented derivation scheme).
inline constexpr std::uint64_t kStreamPool = 1;        // pool member generation
inline constexpr std::uint64_t kStreamRepetition = 2;  // per-repetition ensemble sampling
inline constexpr std::uint64_t kStreamKmeansSeed = 3;  // k-means seed inside a pool member
inline constexpr std::uint64_t kStreamKchoice = 4;     // cluster-count draw inside a pool member

}  // namespace cams
