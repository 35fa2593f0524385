#include "uss/rng.hpp"

#include <stdexcept>

namespace uss {
namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> domain) {
  std::uint64_t key = mix64(seed + kGamma);
  std::uint64_t index = 1;
  for (std::uint64_t word : domain) {
    key = mix64(key ^ mix64(word + index * kGamma));
    ++index;
  }
  return key;
}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("uniform_below requires a positive bound");
  }
  // Lemire's nearly-divisionless rejection method.
  unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(next_u64()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

std::uint8_t RandomStream::bit() {
  if (bits_left_ == 0) {
    bit_buffer_ = next_u64();
    bits_left_ = 64;
  }
  const auto b = static_cast<std::uint8_t>(bit_buffer_ & 1u);
  bit_buffer_ >>= 1;
  --bits_left_;
  return b;
}

bool RandomStream::bernoulli(const Fraction& p) {
  if (p.num() <= 0) return false;
  if (p.num() >= p.den()) return true;
  return uniform_below(static_cast<std::uint64_t>(p.den())) < static_cast<std::uint64_t>(p.num());
}

RandomStream RandomStream::split(std::uint64_t label) const {
  return RandomStream(derive_key(key_, {label}));
}

}  // namespace uss
