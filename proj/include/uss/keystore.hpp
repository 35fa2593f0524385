#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <variant>

#include "uss/bits.hpp"
#include "uss/params.hpp"

namespace uss {

/// Multiplication in GF(2^64) modulo x^64 + x^4 + x^3 + x + 1.
std::uint64_t gf64_mul(std::uint64_t a, std::uint64_t b);

/// Polynomial-evaluation hash of `words` at point `key` (Horner form).
std::uint64_t poly_hash(std::span<const std::uint64_t> words, std::uint64_t key);

struct AuthenticatedEnvelope {
  ParticipantId sender = 0;
  ParticipantId receiver = 0;
  std::uint64_t sequence = 0;
  Bits ciphertext;
  std::uint64_t tag = 0;

  friend bool operator==(const AuthenticatedEnvelope&, const AuthenticatedEnvelope&) = default;
};

struct SeededRandom {
  std::uint64_t seed = 0;
};
struct FileIngest {
  std::filesystem::path directory;
};
using KeySource = std::variant<SeededRandom, FileIngest>;

/// Key usage for one pair, split by what the bits were spent on.
struct LinkUsage {
  std::uint64_t capacity = 0;
  std::uint64_t payload_bits = 0;  // one-time pad
  std::uint64_t tag_key_bits = 0;  // authentication keys
  std::uint64_t envelopes = 0;

  std::uint64_t consumed() const { return payload_bits + tag_key_bits; }
};

/// Pairwise one-time key material with a consumption ledger.
///
/// Both endpoints of a pair read the same key string. The sending side owns
/// the ledger: every envelope takes len(payload) pad bits followed by
/// 2*tag_bits authentication-key bits, and no bit is handed out twice. The
/// receiving side mirrors the sender with its own cursor and expected sequence
/// number, so envelopes on a pair must be received in the order they were sent.
class KeyPool {
 public:
  static constexpr std::uint32_t kTagBits = 64;

  KeyPool() = default;

  /// Installs key material for the unordered pair {a, b}; replaces any previous key.
  void add_link(ParticipantId a, ParticipantId b, Bits key);

  bool has_link(ParticipantId a, ParticipantId b) const;
  std::uint32_t tag_bits() const { return kTagBits; }

  std::uint64_t capacity(ParticipantId a, ParticipantId b) const;
  std::uint64_t consumed(ParticipantId a, ParticipantId b) const;
  std::uint64_t available(ParticipantId a, ParticipantId b) const;
  LinkUsage usage(ParticipantId a, ParticipantId b) const;
  const Bits& key(ParticipantId a, ParticipantId b) const;

  /// All pairs, normalized (low, high).
  std::vector<std::pair<ParticipantId, ParticipantId>> pairs() const;

  /// One-time-pad encrypts and authenticates `payload` from a to b.
  AuthenticatedEnvelope secure_send(ParticipantId a, ParticipantId b, BitSpan payload);

  /// Checks the tag, then decrypts. A wrong sequence number is rejected without
  /// touching key material; a bad tag still consumes the envelope's key bits.
  Bits secure_recv(const AuthenticatedEnvelope& envelope);

 private:
  struct Link {
    Bits key;
    LinkUsage usage;
    std::uint64_t next_send_sequence = 0;
    std::uint64_t recv_cursor = 0;
    std::uint64_t next_recv_sequence = 0;
  };

  static std::pair<ParticipantId, ParticipantId> normalize(ParticipantId a, ParticipantId b);
  Link& link(ParticipantId a, ParticipantId b);
  const Link& link(ParticipantId a, ParticipantId b) const;

  std::map<std::pair<ParticipantId, ParticipantId>, Link> links_;
};

/// Key bits a link needs for the distribution stage, pad plus tag keys.
struct LinkRequirement {
  std::uint64_t payload_bits = 0;
  std::uint64_t envelopes = 0;
  std::uint64_t tag_key_bits = 0;
  std::uint64_t total() const { return payload_bits + tag_key_bits; }
};
LinkRequirement signer_link_requirement(const ValidatedParams& p);
LinkRequirement peer_link_requirement(const ValidatedParams& p);

/// Provisions every pair among P_0..P_N with enough key for one distribution run.
KeyPool provision_keys(const ValidatedParams& p, const KeySource& source);

/// Binary key file: "USSK", u16 version=1, u16 id A, u16 id B, u16 reserved,
/// u32 bit length (all little-endian), then the key bytes, bit k at byte k/8 bit k%8.
struct KeyFile {
  ParticipantId a = 0;
  ParticipantId b = 0;
  Bits key;
};
void write_key_file(const std::filesystem::path& path, ParticipantId a, ParticipantId b, BitSpan key);
KeyFile read_key_file(const std::filesystem::path& path);

/// File name used for pair {a, b} inside a key directory.
std::string key_file_name(ParticipantId a, ParticipantId b);

/// Writes the pool's full key material into `directory`, one file per pair.
void export_keys(const KeyPool& pool, const std::filesystem::path& directory);

}  // namespace uss
