#pragma once
// Seeded sampling helpers that produce the same streams on every standard
// library (std::uniform_int_distribution and std::shuffle do not).

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace spacee {

using Rng = std::mt19937_64;

// Uniform integer in [0, n), n > 0, by rejection sampling.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Standard normal via Box-Muller; both draws of a pair are used.
class NormalSampler {
 public:
  NormalSampler(double mean, double stddev) : mean_(mean), stddev_(stddev) {}

  double operator()(Rng& rng) {
    if (has_spare_) {
      has_spare_ = false;
      return mean_ + stddev_ * spare_;
    }
    double u1;
    do {
      u1 = uniform_unit(rng);
    } while (u1 <= 0.0);
    const double u2 = uniform_unit(rng);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return mean_ + stddev_ * radius * std::cos(angle);
  }

 private:
  double mean_;
  double stddev_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <typename T>
void shuffle_in_place(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

}  // namespace spacee
