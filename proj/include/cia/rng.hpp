#pragma once

#include <cstdint>
#include <random>

#include "cia/types.hpp"

namespace cia {

/// SplitMix64 finalizer. Used to derive independent, well-mixed streams from
/// (master_seed, trial, link) triples so that trials can run on any worker
/// without sharing generator state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t link) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (0x9e3779b97f4a7c15ULL * (trial + 1)));
  s = splitmix64(s ^ (0xc2b2ae3d27d4eb4fULL * (link + 1)));
  return s;
}

/// FNV-1a over raw bytes; used to derive a deterministic permutation seed
/// from channel tap bit patterns.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic normal/complex-normal source. mt19937_64 raw draws are
/// mapped to uniforms explicitly (rather than through distribution objects,
/// whose output is implementation-defined) so that a seed pins the exact
/// tap values.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() {  // in (0, 1]
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1p-53;
  }

  double standard_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// CN(0, 1): real and imaginary parts N(0, 1/2).
  Complex complex_normal() {
    const double re = standard_normal();
    const double im = standard_normal();
    return Complex(re, im) * M_SQRT1_2;
  }

  std::uint64_t raw() { return gen_(); }

  /// Fisher-Yates permutation of {0..n-1}.
  std::vector<int> permutation(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(raw() % static_cast<std::uint64_t>(i + 1));
      std::swap(idx[i], idx[j]);
    }
    return idx;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cia
