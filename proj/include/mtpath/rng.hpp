#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

// Pinned randomness. Every stochastic code path goes through Rng so that
// outputs are reproducible bit-for-bit across runs, platforms, and thread
// counts. Only mt19937_64 raw draws are used from the standard library
// (their sequence is mandated by the standard); all derived quantities
// (bounded ints, reals, normals, shuffles) are hand-rolled here.

namespace mtpath {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n) by masked rejection; unbiased for any n >= 1.
  std::uint64_t bounded(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = ~0ull >> __builtin_clzll((n - 1) | 1);
    for (;;) {
      std::uint64_t v = next() & mask;
      if (v < n) return v;
    }
  }

  // Uniform in [0, 1) with 53 random bits.
  double real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Box-Muller; consumes two draws per pair, second value cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = real01();
    while (u1 <= 0.0) u1 = real01();
    double u2 = real01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Fisher-Yates, descending; identical results regardless of element type.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    shuffle(v.size(), [&](std::size_t a, std::size_t b) { std::swap(v[a], v[b]); });
  }

  // Same permutation through a swap callback, for parallel arrays.
  template <typename Swap>
  void shuffle(std::size_t n, Swap&& swap_fn) {
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      swap_fn(i - 1, j);
    }
  }

  // First k slots of a partial Fisher-Yates over [0, n); order is the draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stable per-item seed derivation for schedule-independent parallel generation.
inline std::uint64_t derive_seed(std::uint64_t base, const std::string& key) {
  return splitmix64(base ^ fnv1a64(key));
}

}  // namespace mtpath
