#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mdn {

// Seedable random source with a platform-independent output stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The distributions are implemented here rather than taken from
// <random> because the standard leaves those implementation-defined:
//   uniform01  = top 53 bits of one engine draw scaled by 2^-53
//   normal     = Box-Muller on two uniform01 draws, second value cached
//   below(n)   = rejection sampling on the top bits of an engine draw
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives an independent stream seed from a base seed and a stream index
// (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace mdn
