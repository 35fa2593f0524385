#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "uss/framework.hpp"
#include "uss/protocol.hpp"
#include "uss/rng.hpp"

namespace uss {

/// A fragment together with where it sits in the verification matrix:
/// values of section `section` at the positions tested by recipient `tester`.
struct KnownFragment {
  ParticipantId section = 0;
  ParticipantId tester = 0;
  Fragment fragment;
};

struct CoalitionMessageView {
  std::map<ParticipantId, Bits> sections;  // own sections of recipient members
  std::vector<KnownFragment> received;     // (v_{j,c}, p_{j,c}) for every j, c in C
  std::vector<KnownFragment> created;      // (v_{c,j}, p_{c,j}) for c in C, every j
  std::optional<Bits> signature;           // full sigma^x when the signer is a member
};

/// Everything a coalition knows after an honest distribution stage.
struct CoalitionView {
  Coalition coalition;
  std::vector<CoalitionMessageView> messages;

  const CoalitionMessageView& message(MessageId x) const;
};

enum class Intent {
  kAny,
  kForge,         // signer must be outside
  kSignerAttack,  // signer must be inside (repudiation, non-transferability)
};

struct PoolOptions {
  Intent intent = Intent::kAny;
  /// Off only for oracle experiments that deliberately exceed floor(N d_f).
  bool enforce_capacity = true;
};

/// Union of the members' stored data; nothing held only by honest parties.
CoalitionView pool_knowledge(const ValidatedParams& p, const SignerState& signer,
                             std::span<const RecipientState> recipients, const Coalition& coalition,
                             PoolOptions options = {});

/// Guessing forger: true sections where known, known fragment bits elsewhere,
/// uniform coin flips for every remaining bit.
Signature forge_attempt(const CoalitionView& view, const ValidatedParams& p, MessageId x,
                        std::optional<ParticipantId> target, RandomStream& stream);

/// p_e = (s_l + s_l') / 2, the error rate balancing the two Hoeffding tails.
Fraction optimal_error_rate(const ValidatedParams& p, Level l, Level l_lower);

/// Signer-side tampering: each member section has every bit tested by
/// `target_fail` flipped (bits tested by `target_pass` stay intact); every
/// honest section bit flips independently with probability p_e.
Signature tamper_attempt(const CoalitionView& view, const ValidatedParams& p, MessageId x, Level l,
                         Level l_lower, ParticipantId target_pass, ParticipantId target_fail,
                         RandomStream& stream, std::optional<Fraction> error_rate = std::nullopt);

}  // namespace uss
