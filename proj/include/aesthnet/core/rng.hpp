#pragma once

#include <cstdint>
#include <vector>

namespace aesthnet {

namespace detail {

// splitmix64; the output stream is fully specified by the seed, so results
// are identical across platforms and standard library versions.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a * 0x9e3779b97f4a7c15ULL + b;
  return splitmix64(s);
}

}  // namespace detail

/// Deterministic pseudo-random stream. Unlike std::uniform_*_distribution,
/// every draw is bit-reproducible across compilers.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// In-place Fisher-Yates shuffle with a platform-independent draw.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::uint64_t state_;
};

/// Stateless coin/uniform draws keyed by coordinates. Batch augmentation and
/// dropout use these so the delivered stream is a pure function of the key,
/// independent of worker count or evaluation order.
struct CounterRng {
  static std::uint64_t key(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index) {
    return detail::mix(detail::mix(seed, stream), index);
  }

  static bool coin(std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t index) {
    return (key(seed, stream, index) & 1ULL) != 0;
  }

  static double uniform(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t index) {
    return static_cast<double>(key(seed, stream, index) >> 11) * 0x1.0p-53;
  }
};

}  // namespace aesthnet
