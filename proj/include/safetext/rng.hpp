#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace safetext {

// Seeded RNG with hand-rolled value transforms. mt19937_64 output is pinned by
// the standard, but the std distributions are not, so uniform/normal/bounded
// are implemented here to keep runs bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed), base_seed_(seed) {}

  std::uint64_t seed() const { return base_seed_; }

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, one value cached
  double normal();

  // Unbiased integer in [0, n), rejection sampling
  std::uint64_t bounded(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent stream derived from the construction seed; does not advance
  // this engine.
  Rng fork(std::uint64_t stream) const {
    return Rng(seed_mix(base_seed_, stream));
  }

  static std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b);

 private:
  std::mt19937_64 gen_;
  std::uint64_t base_seed_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace safetext
