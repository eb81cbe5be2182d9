#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace fairsplit {

// All randomness in the toolkit flows through this wrapper so that draws are
// reproducible across platforms. std::mt19937_64 output is fully specified by
// the standard; the bounded/real draws below avoid std::*_distribution, whose
// results are implementation-defined.
class Rng {
 public:
  // Recorded in manifests next to the seed that produced them.
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n), n > 0. Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r < threshold);
    return r % n;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Box-Muller, second value cached.
  double gaussian();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // Draws k distinct indices from [0, n), in increasing order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

// Derives an independent stream seed for a named purpose, so one user-facing
// seed can drive test reservation, cell sampling and splitting without the
// streams overlapping.
std::uint64_t seed_for(std::uint64_t base_seed, std::string_view purpose);

}  // namespace fairsplit
