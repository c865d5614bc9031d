#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace deadeye {

// Mixes a parent seed with a stream index into an independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Seeded generator whose outputs are identical on every platform: the engine
// is std::mt19937_64 (fully specified by the standard) and all distributions
// are implemented here instead of relying on the library's unspecified ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // [0, 1) with 53 bits of precision.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  bool bernoulli(double p) { return uniform01() < p; }
  double normal(double mean = 0.0, double sd = 1.0);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace deadeye
