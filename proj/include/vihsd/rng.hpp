#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace vihsd {

/// Deterministic random stream.
///
/// The engine is `std::mt19937_64` (MT19937-64, Matsumoto & Nishimura), whose
/// output sequence for a given seed is fixed by the C++ standard. All derived
/// samples are computed here rather than through `<random>` distributions,
/// whose algorithms are implementation-defined:
///
///   uniform()        = (next_u64() >> 11) * 2^-53            in [0, 1)
///   uniform(lo, hi)  = lo + (hi - lo) * uniform()
///   below(n)         = rejection sampling on next_u64() against the largest
///                      multiple of n
///   bernoulli(p)     = uniform() < p
///
/// so a seed reproduces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream; consumes one value from this stream.
  Rng split() { return Rng(next_u64() ^ 0x9E3779B97F4A7C15ULL); }

  template <typename It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j = below(i);
      std::iter_swap(first + (i - 1), first + j);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace vihsd
