#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vfl {

// All randomness in the simulator flows from 64-bit seeds. Sub-streams are
// derived by hashing (base, stream, index) through splitmix64, so element i
// of a batch gets the same nonce no matter which thread encrypts it.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
  std::uint64_t s = base;
  std::uint64_t a = splitmix64(s);
  s ^= stream * 0xd1b54a32d192ed03ULL;
  std::uint64_t b = splitmix64(s);
  s ^= index * 0x8cb92ba72f3d8dd7ULL;
  std::uint64_t c = splitmix64(s);
  return a ^ (b << 1) ^ (c << 2) ^ c;
}

// FNV-1a; used for stream tags and key identifiers.
constexpr std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t base, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(base, fnv1a(stream), index));
}

}  // namespace vfl
