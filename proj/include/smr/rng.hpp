#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace smr {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based pseudo-random stream (SplitMix64 core, Box-Muller normals).
///
/// A stream is fully determined by (seed, stream_id), so ensembles can key one
/// stream per trajectory and reproduce any path independently of evaluation
/// order. Draws are a pure function of (key, counter); replaying a stream from
/// the same key yields bit-identical values.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(detail::mix64(detail::mix64(seed) ^
                           (0x9E3779B97F4A7C15ULL * (stream_id + 1)))) {}

  std::uint64_t next_raw() {
    ++counter_;
    return detail::mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_raw() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw; consumes exactly two raw values.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace smr
