#ifndef PAIRRANK_RNG_HPP
#define PAIRRANK_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

// Deterministic randomness helpers. Everything here avoids
// implementation-defined library behavior (uniform_real_distribution,
// std::shuffle) so that seeded outputs are identical across compilers
// and standard libraries, not just across runs of one binary.

namespace pairrank {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h = (h ^ c) * kFnvPrime;
  }
  // Field separator so ("ab","c") and ("a","bc") hash differently.
  h = (h ^ 0x1f) * kFnvPrime;
  return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h = kFnvOffset) {
  for (int i = 0; i < 8; ++i) {
    h = (h ^ (v & 0xff)) * kFnvPrime;
    v >>= 8;
  }
  return h;
}

// Derives a stream key from a seed plus string parts; used to give every
// (seed, input...) combination its own independent generator.
inline std::uint64_t derive_stream(std::uint64_t seed,
                                   std::initializer_list<std::string_view> parts) {
  std::uint64_t h = fnv1a64_u64(seed);
  for (auto p : parts) h = fnv1a64(p, h);
  return h;
}

// Uniform double in [0,1) from the top 53 bits; bit-identical everywhere.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform index in [0,n). Modulo bias is < 2^-53 for any n we use.
inline std::size_t uniform_index(std::mt19937_64& g, std::size_t n) {
  return static_cast<std::size_t>(uniform01(g) * static_cast<double>(n));
}

template <typename T>
void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(g, i);
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace pairrank

#endif  // PAIRRANK_RNG_HPP
