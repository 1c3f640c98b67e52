#ifndef ERTKIT_RNG_HPP
#define ERTKIT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace ertkit {

// Deterministic, platform-independent random streams. std::mt19937 is
// portable but the standard distributions are not, so all draws below are
// implemented directly. Streams derived from (seed, index...) are
// independent of execution order, which keeps parallel and sequential
// schedules bit-identical.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Derive a child stream; derive(seed, i, j) is stable in (i, j).
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                    std::uint64_t c = 0) {
    std::uint64_t s = seed;
    s = mix(s ^ (0xbf58476d1ce4e5b9ULL * (a + 1)));
    s = mix(s ^ (0x94d049bb133111ebULL * (b + 1)));
    s = mix(s ^ (0xff51afd7ed558ccdULL * (c + 1)));
    return Rng(s);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    return mix(z);
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); rejection sampling, unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via the polar method (rejection; deterministic given
  /// the stream).
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace ertkit

#endif
