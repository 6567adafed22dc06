#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fairshift {

// Everything random in the toolkit flows through this header. std::mt19937_64
// is the only engine (its output sequence is pinned by the standard); the
// distributions are hand-rolled because the std:: ones are
// implementation-defined and would break cross-toolchain reproducibility.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Named sub-streams for seed derivation. Values are part of the on-disk
/// reproducibility contract (they appear in run manifests); never renumber.
enum class Stream : std::uint64_t {
  Trial = 1,
  Split = 2,
  SvmSubsample = 3,
  Massage = 4,
  RrApply = 5,
  BiasInject = 6,
  RrbTrial = 7,
  Pipeline = 8,
  Synthetic = 9,
};

/// Counter-based derivation: derive(base, s, i) =
/// splitmix64(splitmix64(base ^ splitmix64(tag(s))) + i).
inline std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
  const std::uint64_t tagged = splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(stream)));
  return splitmix64(tagged + index);
}

/// Row-stable coin flip: depends only on (seed, row), not on how many other
/// draws happened. Used where flips must commute with row iteration order.
inline bool hashed_bernoulli(std::uint64_t seed, std::uint64_t row, double p) {
  const std::uint64_t u = splitmix64(splitmix64(seed) + row);
  return static_cast<double>(u >> 11) * 0x1.0p-53 < p;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) built from the top 53 bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n) via rejection sampling.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fairshift
