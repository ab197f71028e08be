#pragma once

#include <cstdint>

namespace ocv2 {

/// Counter-based 64-bit generator.
///
/// Output n is splitmix64(key + n * golden_gamma), so the whole state is the
/// pair (key, counter) and serializes losslessly into a GameState. Streams
/// for independent consumers are derived with `fork`, which never advances
/// the parent.
class Rng {
 public:
  Rng() = default;
  explicit Rng(std::uint64_t seed) : key_(mix(seed)) {}
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  std::uint64_t next() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// An independent stream keyed on (this key, tag).
  Rng fork(std::uint64_t tag) const { return Rng(mix(key_ ^ mix(tag + kGamma)), 0); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  friend bool operator==(const Rng&, const Rng&) = default;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_ = mix(0);
  std::uint64_t counter_ = 0;
};

}  // namespace ocv2
