#pragma once

#include <cstdint>
#include <initializer_list>

#include "uss/fraction.hpp"

namespace uss {

/// What a random stream is used for; part of every stream's domain label.
enum class Purpose : std::uint64_t {
  kSignature = 1,
  kPartition = 2,
  kKeyMaterial = 3,
  kAttack = 4,
  kTrial = 5,
  kTest = 6,
};

/// 64-bit finalizer from SplitMix64.
std::uint64_t mix64(std::uint64_t x);

/// Folds a seed and a list of domain words into one stream key.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> domain);

/// Counter-based generator: output i is mix64(key + (i+1) * gamma).
///
/// Streams are identified by (seed, purpose, participant, message); distinct
/// labels give independent-looking streams, and the whole sequence is a pure
/// function of the label. Bounded draws are implemented here rather than via
/// <random> distributions so results do not vary between standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}
  RandomStream(std::uint64_t seed, Purpose purpose, std::uint64_t participant = 0,
               std::uint64_t message = 0)
      : key_(derive_key(seed, {static_cast<std::uint64_t>(purpose), participant, message})) {}

  std::uint64_t next_u64();

  /// Uniform on [0, bound); bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// One fair bit.
  std::uint8_t bit();

  /// True with probability exactly p (p is clamped to [0, 1]).
  bool bernoulli(const Fraction& p);

  /// Child stream with an extra domain word; does not advance this stream.
  RandomStream split(std::uint64_t label) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint64_t bit_buffer_ = 0;
  int bits_left_ = 0;
};

}  // namespace uss
