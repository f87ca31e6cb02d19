#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace sflow {

// Portable draws on top of std::mt19937_64: the engine output is fixed by the
// standard, the distribution classes are not, so conversions are done here.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a key.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t key) {
  return splitmix64(parent ^ splitmix64(key + 0x632BE59BD9B4E019ull));
}

/// Uniform in [0, 1) with 53 bits of resolution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n).
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

inline std::uint64_t fnv1a(std::span<const unsigned char> bytes,
                           std::uint64_t h = 0xCBF29CE484222325ull) {
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ull) {
  return fnv1a(std::span(reinterpret_cast<const unsigned char*>(s.data()), s.size()), h);
}

}  // namespace sflow
