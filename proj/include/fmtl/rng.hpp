#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace fmtl {

/// Mixes a 64-bit word (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Derives a child seed from a parent seed and a sequence of integer keys.
/// Distinct key tuples give statistically independent streams, so work can be
/// addressed by (interval, subject), (replication, member), ... in any order.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> keys);

/// Counter-based SplitMix64 engine. Cheap to construct, which matters because
/// the reduction step opens one stream per (interval, subject) pair.
/// Satisfies UniformRandomBitGenerator so <random> distributions accept it.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform index in [0, n). Lemire's multiply-shift with rejection, so
  /// results do not depend on the standard library's distribution code.
  std::uint64_t below(std::uint64_t n);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal draw (Marsaglia polar method).
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace fmtl
