#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sneakbp {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based split: the sub-stream seed depends only on the master seed
/// and the key path (experiment tag, sigma index, trial index, ...), never on
/// the order in which streams are requested.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(master, keys));
}

}  // namespace sneakbp
