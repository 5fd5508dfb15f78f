#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sneakbp/polar/code_spec.hpp"

namespace sneakbp::polar {

using Bits = std::vector<std::uint8_t>;

/// In-place x = u F^{(x)n} over GF(2) with F = [[1,0],[1,1]] in natural
/// (non bit-reversed) order. The transform is its own inverse.
inline void polar_transform(Bits& v) {
  const std::size_t n = v.size();
  for (std::size_t h = 1; h < n; h <<= 1)
    for (std::size_t base = 0; base < n; base += 2 * h)
      for (std::size_t j = base; j < base + h; ++j) v[j] ^= v[j + h];
}

/// Places the info bits on A, zeros elsewhere, and applies the transform.
inline Bits encode(const Bits& info_bits, const PolarCodeSpec& spec) {
  if (static_cast<int>(info_bits.size()) != spec.dimension())
    throw std::invalid_argument("encode expects " + std::to_string(spec.dimension()) + " info bits, got " +
                                std::to_string(info_bits.size()));
  Bits u(static_cast<std::size_t>(spec.block_length()), 0);
  for (std::size_t k = 0; k < info_bits.size(); ++k) u[static_cast<std::size_t>(spec.info_set()[k])] = info_bits[k] & 1U;
  polar_transform(u);
  return u;
}

/// Recovers the info bits of a codeword (inverse transform, then read A).
inline Bits extract_info(const Bits& codeword, const PolarCodeSpec& spec) {
  if (static_cast<int>(codeword.size()) != spec.block_length())
    throw std::invalid_argument("codeword length does not match the code");
  Bits u = codeword;
  polar_transform(u);
  Bits info;
  info.reserve(spec.info_set().size());
  for (int i : spec.info_set()) info.push_back(u[static_cast<std::size_t>(i)]);
  return info;
}

}  // namespace sneakbp::polar
