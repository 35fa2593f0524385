#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace uss {

/// One bit per element, each 0 or 1. Sizes here are small (K = nN), so the
/// unpacked form keeps indexing and slicing trivial.
using Bits = std::vector<std::uint8_t>;
using BitSpan = std::span<const std::uint8_t>;

inline std::size_t hamming_distance(BitSpan a, BitSpan b) {
  std::size_t h = 0;
  const std::size_t len = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < len; ++i) h += (a[i] != b[i]);
  return h;
}

/// Packs bits into bytes, bit k going to byte k/8 at bit k%8.
inline std::vector<std::uint8_t> pack_bits(BitSpan bits) {
  std::vector<std::uint8_t> out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return out;
}

inline Bits unpack_bits(std::span<const std::uint8_t> bytes, std::size_t bit_count) {
  Bits out(bit_count, 0);
  for (std::size_t i = 0; i < bit_count; ++i) out[i] = (bytes[i / 8] >> (i % 8)) & 1u;
  return out;
}

inline std::string bits_to_string(BitSpan bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

/// Appends `width` bits of `value`, least significant first.
inline void append_uint(Bits& out, std::uint64_t value, std::uint32_t width) {
  for (std::uint32_t b = 0; b < width; ++b) out.push_back(static_cast<std::uint8_t>((value >> b) & 1u));
}

inline std::uint64_t read_uint(BitSpan bits, std::size_t offset, std::uint32_t width) {
  std::uint64_t v = 0;
  for (std::uint32_t b = 0; b < width; ++b) v |= static_cast<std::uint64_t>(bits[offset + b] & 1u) << b;
  return v;
}

}  // namespace uss
