#pragma once

#include <cstdint>
#include <random>

namespace stanpinn {

/// Deterministic uniform generator. std::uniform_real_distribution is not
/// bit-specified by the standard, so doubles are derived from the raw engine
/// output directly; results are identical across compilers and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  /// Mixes several seed words (e.g. run seed + epoch) into one stream.
  static Rng from_words(uint64_t a, uint64_t b, uint64_t c = 0) {
    // splitmix64-style finalizer over the concatenated words
    uint64_t h = 0x9e3779b97f4a7c15ull;
    for (uint64_t w : {a, b, c}) {
      h ^= mix(w + 0x9e3779b97f4a7c15ull + h);
      h *= 0xbf58476d1ce4e5b9ull;
    }
    return Rng(mix(h));
  }

  uint64_t next() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) { return eng_() % n; }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::mt19937_64 eng_;
};

}  // namespace stanpinn
