#pragma once

// Counter-based random streams. Draw i of stream s under seed k is a pure
// function of (k, s, i): replicates own disjoint substreams, so any parallel
// schedule reproduces the serial run bitwise.

#include <cstdint>

#include "mtp/gauss.hpp"

namespace mtp {

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Vigna 2015 / Stafford mix 13).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// One replicate's stream; cheap to construct, no heap state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : base_(detail::mix64(detail::mix64(seed + detail::kGolden) ^
                            detail::mix64(stream * 0xD1B54A32D192ED03ull + 1))) {}

  std::uint64_t next_u64() { return detail::mix64(base_ + ++counter_ * detail::kGolden); }

  /// Uniform draw strictly inside (0,1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard-normal draw via the inverse cdf.
  double next_normal() { return norm_quantile(next_uniform()); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Deterministic per-cell seed derivation (master seed, table id, row, col).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  std::uint64_t h = detail::mix64(master + detail::kGolden);
  h = detail::mix64(h ^ (a * 0xA24BAED4963EE407ull + 1));
  h = detail::mix64(h ^ (b * 0x9FB21C651E98DF25ull + 1));
  h = detail::mix64(h ^ (c * 0xD1B54A32D192ED03ull + 1));
  return h;
}

}  // namespace mtp
