#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace polyfreg {

// Deterministic substream derivation.
//
// Every random quantity in the library is drawn from a Stream constructed
// from (seed, domain, index): `domain` tags what the numbers are for (toy
// coefficients, noise, splits, ...) and `index` identifies the sample / run
// / task. Two consequences:
//   * results are a pure function of the seed, independent of evaluation
//     order and of how work is distributed over threads, and
//   * enlarging one consumer (e.g. drawing more noise) never shifts the
//     numbers seen by another.
//
// Deviates are mapped from raw 64-bit engine output by hand (multiplication
// by 2^-53 for uniforms, Box-Muller for normals) because the standard
// library's distribution objects are not required to produce identical
// sequences across implementations, and byte-identical output files are a
// hard requirement here.

// SplitMix64 finalizer; good avalanche, cheap, well studied.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t domain,
                                    std::uint64_t index) {
  std::uint64_t h = mix64(seed + 0x632be59bd9b4e019ull);
  h = mix64(h ^ mix64(domain + 0x9e3779b97f4a7c15ull));
  h = mix64(h ^ mix64(index + 0xd1b54a32d192ed03ull));
  return h;
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index)
      : gen_(substream_seed(seed, domain, index)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer uniform on [0, n) by rejection (unbiased).
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller; the paired deviate is cached so two
  // consecutive calls cost two uniforms total.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Domain tags. Fixed constants: changing any of these changes every output
// derived from the affected domain.
namespace rng_domain {
inline constexpr std::uint64_t kToyCoefficients = 1;
inline constexpr std::uint64_t kToyNoise = 2;
inline constexpr std::uint64_t kSplit = 3;
inline constexpr std::uint64_t kSurrogate = 4;
inline constexpr std::uint64_t kTestInstances = 100;
}  // namespace rng_domain

}  // namespace polyfreg
