#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "uss/bits.hpp"
#include "uss/params.hpp"
#include "uss/protocol.hpp"

namespace uss {

/// Any scheme with per-recipient, per-level verification functions.
class LeveledVerifier {
 public:
  virtual ~LeveledVerifier() = default;

  virtual std::uint32_t num_recipients() const = 0;
  virtual Level max_level() const = 0;
  virtual std::uint32_t signature_bits() const = 0;

  /// Ver_(i,l)(x, sigma) for l in -1..max_level(). Level max_level()+1 is
  /// always false by convention; anything else outside the range throws.
  virtual bool verify(ParticipantId i, MessageId x, BitSpan sigma, Level l) const = 0;

  /// Highest level in -1..max_level() at which i accepts, or nullopt.
  virtual std::optional<Level> highest_level(ParticipantId i, MessageId x, BitSpan sigma) const;
};

/// The multiparty bit-mismatch protocol's verification functions.
class ProtocolVerifier final : public LeveledVerifier {
 public:
  ProtocolVerifier(const ValidatedParams& params, std::span<const RecipientState> recipients)
      : params_(params), recipients_(recipients) {}

  std::uint32_t num_recipients() const override { return params_.num_recipients(); }
  Level max_level() const override { return params_.l_max(); }
  std::uint32_t signature_bits() const override { return params_.signature_bits(); }
  bool verify(ParticipantId i, MessageId x, BitSpan sigma, Level l) const override;
  std::optional<Level> highest_level(ParticipantId i, MessageId x, BitSpan sigma) const override;

 private:
  const ValidatedParams& params_;
  std::span<const RecipientState> recipients_;
};

/// A set of colluding participants; id 0 denotes the signer.
struct Coalition {
  std::set<ParticipantId> members;

  bool has_signer() const { return members.contains(kSigner); }
  bool contains(ParticipantId id) const { return members.contains(id); }
  std::vector<ParticipantId> recipient_members() const;
  std::vector<ParticipantId> honest_recipients(std::uint32_t num_recipients) const;
};

struct SignatureClassification {
  bool authentic = false;
  bool valid = false;
  std::set<ParticipantId> acceptable_by;
  std::set<ParticipantId> fraudulent_for;
  std::map<ParticipantId, std::optional<Level>> per_recipient_max_level;  // nullopt: fails at 0
  std::optional<Level> l_transferable;
};

/// Labels (x, sigma) with every classification from the security definitions.
SignatureClassification classify_signature(const LeveledVerifier& v, MessageId x, BitSpan sigma,
                                           std::optional<BitSpan> authentic_ref = std::nullopt);

enum class Verdict { kValid, kInvalid, kTransferable, kNotTransferable };
const char* to_string(Verdict v);

struct DisputeVerdict {
  Verdict verdict = Verdict::kInvalid;
  std::set<ParticipantId> accepting;
};

/// Majority vote over recipients at level -1: Valid iff more than N/2 accept.
DisputeVerdict mv_dispute(const LeveledVerifier& v, MessageId x, BitSpan sigma);

/// Transferability vote at level l: l-transferable iff more than N/2 accept at l-1.
DisputeVerdict mv_transfer_dispute(const LeveledVerifier& v, MessageId x, BitSpan sigma, Level l);

enum class AttackKind { kRepudiation, kForgery, kNonTransferability };

/// Which honest recipient a forgery has to fool.
struct ForgeTarget {
  std::optional<ParticipantId> fixed;  // nullopt: any honest recipient
};

/// Rep / Forg / NonTrans success indicator for one output (x, sigma).
int attack_indicator(AttackKind kind, const Coalition& coalition, const LeveledVerifier& v, MessageId x,
                     BitSpan sigma, std::optional<Level> l = std::nullopt, ForgeTarget target = {});

/// The stricter forgery notion: accepted by some honest recipient and upheld by dispute.
int forgery_upheld_by_dispute(const Coalition& coalition, const LeveledVerifier& v, MessageId x,
                              BitSpan sigma);

struct HonestSetCounts {
  ParticipantId id = 0;
  std::uint64_t accepted = 0;           // |S_i|
  std::uint64_t accepted_by_both = 0;   // |S_i ∩ S_C|
  double forge_ratio = 0.0;             // |S_i ∩ S_C| / |S_C|
  double size_ratio = 0.0;              // |S_i| / |Sigma|
};

struct SetReport {
  std::uint64_t signature_space = 0;    // |Sigma|
  std::uint64_t coalition_accepted = 0; // |S_C|
  std::vector<HonestSetCounts> honest;
};

inline constexpr std::uint32_t kMaxEnumerableBits = 24;

/// Membership bitmap over all 2^K signatures of recipient i's acceptance set.
std::vector<bool> acceptance_set(const LeveledVerifier& v, MessageId x, ParticipantId i, Level l);

/// Exhaustive acceptance-set sizes; S_C of the empty coalition is Sigma.
SetReport enumerate_acceptance_sets(const LeveledVerifier& v, MessageId x, const Coalition& coalition,
                                    Level l = 0);

}  // namespace uss
