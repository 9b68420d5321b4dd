#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace augwm {

/// xoshiro256** generator seeded through SplitMix64 from a (seed, stream) pair.
///
/// Streams are derived from the construction pair, never from the current
/// state, so `split(i)` yields the same child no matter how many draws the
/// parent has already produced. Parallel work items each take their own
/// stream and stay reproducible under any scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller; no cached second variate.
  double normal();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Child generator for sub-stream `stream`.
  [[nodiscard]] Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t s_[4];
};

}  // namespace augwm
