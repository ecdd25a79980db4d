#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace xfield {

// Sequential random stream used throughout. Chains are bit-reproducible
// given the seed because every stream is derived from it with stream_key.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Hashes a seed and an ordered list of integer keys to a 64-bit value.
inline std::uint64_t stream_key(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Rng(stream_key(seed, keys));
}

// Uniform in [0, 1) from the top 53 bits of a key.
inline double key_to_unit(std::uint64_t key) {
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

// Counter-based draw: the value depends only on (seed, keys), never on the
// order in which callers ask for it.
inline double keyed_uniform(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return key_to_unit(stream_key(seed, keys));
}

inline double uniform01(Rng& rng) {
  return key_to_unit(rng());
}

}  // namespace xfield
