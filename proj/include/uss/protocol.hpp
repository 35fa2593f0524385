#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "uss/bits.hpp"
#include "uss/keystore.hpp"
#include "uss/params.hpp"
#include "uss/rng.hpp"

namespace uss {

/// Full K = nN bit signature for one message; section j (1-based) is
/// bits [(j-1)n, jn).
struct Signature {
  MessageId message = 0;
  Bits bits;

  BitSpan section(std::uint32_t j, std::uint32_t n) const {
    return BitSpan(bits).subspan(static_cast<std::size_t>(j - 1) * n, n);
  }

  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Values of a section at a strictly increasing list of 0-based positions.
struct Fragment {
  Bits values;
  std::vector<std::uint32_t> positions;

  friend bool operator==(const Fragment&, const Fragment&) = default;
};

/// What one recipient holds for one message after distribution.
struct RecipientMessage {
  Bits own_section;                // sigma_i, from the signer
  std::vector<Fragment> row;       // row[j-1]: fragment of section j this recipient tests
  std::vector<Fragment> created;   // created[k-1]: fragment of sigma_i handed to recipient k

  friend bool operator==(const RecipientMessage&, const RecipientMessage&) = default;
};

struct RecipientState {
  ParticipantId id = 0;
  std::vector<RecipientMessage> messages;

  const RecipientMessage& message(MessageId x) const;

  friend bool operator==(const RecipientState&, const RecipientState&) = default;
};

struct SignerState {
  std::vector<Signature> signatures;
  std::vector<bool> used;

  friend bool operator==(const SignerState&, const SignerState&) = default;
};

struct TranscriptRecord {
  std::string step;
  ParticipantId sender = 0;
  ParticipantId receiver = 0;
  MessageId message = 0;
  std::uint64_t sequence = 0;
  std::uint64_t payload_bits = 0;
  std::uint64_t tag = 0;

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

struct Transcript {
  std::vector<TranscriptRecord> records;

  /// One JSON object per line.
  void write_jsonl(std::ostream& out) const;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct Distribution {
  SignerState signer;
  std::vector<RecipientState> recipients;  // recipients[i-1] is P_i
  Transcript transcript;

  const RecipientState& recipient(ParticipantId i) const { return recipients.at(i - 1); }
};

/// Uniformly random split of {0..n-1} into `parts` sorted sets of n/parts positions.
std::vector<std::vector<std::uint32_t>> partition_positions(RandomStream& stream, std::uint32_t n,
                                                            std::uint32_t parts);

/// Sees every envelope in flight and may alter it (man-in-the-middle hook).
using ChannelTap = std::function<void(AuthenticatedEnvelope&)>;

/// Runs the distribution stage over authenticated one-time-pad channels.
/// Throws AuthFailure (abort) if any envelope fails authentication.
Distribution run_distribution(const ValidatedParams& p, KeyPool& pool, const ChannelTap& tap = {});

/// Returns sigma^x and marks x as used.
Signature sign(SignerState& signer, MessageId x);

/// Hamming distance between section_bits at the fragment's positions and its values.
std::uint32_t fragment_mismatches(const Fragment& fragment, BitSpan section_bits);

/// T: 1 iff mismatches < s_l * n/N (strict, exact).
int fragment_test(const ValidatedParams& p, const RecipientState& r, MessageId x, std::uint32_t section,
                  BitSpan section_bits, Level l);

/// Mismatch count for every section j (index j-1) against recipient r's row.
std::vector<std::uint32_t> section_mismatches(const ValidatedParams& p, const RecipientState& r,
                                              MessageId x, BitSpan sigma);
std::vector<std::uint32_t> section_mismatches(const ValidatedParams& p, const RecipientState& r,
                                              const Signature& sigma);

/// Number of sections whose test passes at level l.
std::uint32_t passing_tests(const ValidatedParams& p, const RecipientState& r, const Signature& sigma,
                            Level l);

/// Ver: true iff passing tests > N * f_l (strict, exact).
bool verify(const ValidatedParams& p, const RecipientState& r, const Signature& sigma, Level l);
bool verify(const ValidatedParams& p, const RecipientState& r, MessageId x, BitSpan sigma, Level l);

/// Same decision from already-computed mismatch counts.
bool accepts(const ValidatedParams& p, std::span<const std::uint32_t> mismatches, Level l);
bool test_passes(const ValidatedParams& p, std::uint32_t mismatches, Level l);

}  // namespace uss
