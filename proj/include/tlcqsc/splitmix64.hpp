#pragma once

#include <cstdint>

namespace tlcqsc {

/// SplitMix64 with the published constants. Chosen over <random> engines so
/// that traces reproduce bit-for-bit across implementations and languages.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound). bound must be nonzero. The slight modulo bias is
  /// irrelevant at the bounds used here (pending-set sizes, delay windows).
  std::uint64_t next_below(std::uint64_t bound) { return next() % bound; }

  /// One-shot output finalizer, used to derive independent sub-stream seeds.
  static std::uint64_t scramble(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Named sub-streams of one run seed. Keeping the scheduler and each node's
/// ticket draws on disjoint streams makes every draw independent of delivery
/// order.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64(SplitMix64::scramble(seed ^ (tag + 1) * 0x9E3779B97F4A7C15ULL));
}

inline constexpr std::uint64_t kStreamScheduler = 0x5343484544ULL;  // "SCHED"
inline constexpr std::uint64_t kStreamTicketBase = 0x5449434B4554ULL;  // "TICKET"

}  // namespace tlcqsc
