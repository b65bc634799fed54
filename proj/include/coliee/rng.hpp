#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>

namespace coliee {

/// PCG32 (XSH-RR 64/32) generator, seeded as the reference `pcg32_srandom`.
///
/// Every stochastic step of the pipeline draws from this generator so that
/// results are reproducible bit-for-bit across platforms:
///
///   state = 0; inc = (stream << 1) | 1
///   step(); state += seed; step()
///   step():   state = state * 6364136223846793005 + inc
///   output:   xorshifted = ((old >> 18) ^ old) >> 27; rot = old >> 59
///             return rotr32(xorshifted, rot)
class Pcg32 {
 public:
  static constexpr std::uint64_t kDefaultStream = 0xda3e39cb94b95bdbULL;

  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = kDefaultStream);

  std::uint32_t next();

  /// Uniform integer in [0, bound) by rejection of the low (2^32 mod bound)
  /// outputs. `bound` must be positive.
  std::uint32_t bounded(std::uint32_t bound);

  /// Uniform real in [0, 1) with 53 random bits (two draws, high word first).
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one value per call, two uniforms).
  double normal();

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

/// In-place Fisher-Yates: for i = n-1 down to 1, swap(i, bounded(i+1)).
template <typename T>
void shuffle(std::span<T> items, Pcg32& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = rng.bounded(static_cast<std::uint32_t>(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace coliee
