#include "uss/adversary.hpp"

#include "uss/errors.hpp"

namespace uss {
namespace {

void require_honest(const CoalitionView& view, const ValidatedParams& p, ParticipantId id, const char* what) {
  if (id < 1 || id > p.num_recipients() || view.coalition.contains(id)) {
    throw RoleError(std::string(what) + " " + std::to_string(id) + " is not an honest recipient");
  }
}

}  // namespace

const CoalitionMessageView& CoalitionView::message(MessageId x) const {
  if (x >= messages.size()) {
    throw UnknownMessage("message " + std::to_string(x) + " is not in the message set");
  }
  return messages[x];
}

CoalitionView pool_knowledge(const ValidatedParams& p, const SignerState& signer,
                             std::span<const RecipientState> recipients, const Coalition& coalition,
                             PoolOptions options) {
  const auto members = coalition.recipient_members();
  for (ParticipantId c : members) {
    if (c < 1 || c > p.num_recipients()) {
      throw RoleError("coalition member " + std::to_string(c) + " is not a participant");
    }
  }
  if (options.enforce_capacity && members.size() > p.coalition_capacity()) {
    throw CoalitionTooLarge(std::to_string(members.size()) + " recipients exceed floor(N*d_f) = " +
                            std::to_string(p.coalition_capacity()));
  }
  if (options.intent == Intent::kForge && coalition.has_signer()) {
    throw RoleError("a forging coalition cannot contain the signer");
  }
  if (options.intent == Intent::kSignerAttack && !coalition.has_signer()) {
    throw RoleError("this attack needs the signer in the coalition");
  }

  CoalitionView view;
  view.coalition = coalition;
  view.messages.resize(p.num_messages());
  for (MessageId x = 0; x < p.num_messages(); ++x) {
    CoalitionMessageView& mv = view.messages[x];
    if (coalition.has_signer()) mv.signature = signer.signatures.at(x).bits;
    for (ParticipantId c : members) {
      const RecipientMessage& rm = recipients[c - 1].message(x);
      mv.sections[c] = rm.own_section;
      for (ParticipantId j = 1; j <= p.num_recipients(); ++j) {
        mv.received.push_back({j, c, rm.row[j - 1]});
        mv.created.push_back({c, j, rm.created[j - 1]});
      }
    }
  }
  return view;
}

Signature forge_attempt(const CoalitionView& view, const ValidatedParams& p, MessageId x,
                        std::optional<ParticipantId> target, RandomStream& stream) {
  if (view.coalition.has_signer()) {
    throw RoleError("forging is defined for coalitions without the signer");
  }
  if (target) require_honest(view, p, *target, "forgery target");

  const CoalitionMessageView& mv = view.message(x);
  const std::uint32_t n = p.n();
  Signature sigma;
  sigma.message = x;
  sigma.bits.resize(p.signature_bits());
  for (ParticipantId j = 1; j <= p.num_recipients(); ++j) {
    auto section = std::span(sigma.bits).subspan(static_cast<std::size_t>(j - 1) * n, n);
    if (auto it = mv.sections.find(j); it != mv.sections.end()) {
      std::copy(it->second.begin(), it->second.end(), section.begin());
      continue;
    }
    for (auto& b : section) b = stream.bit();
  }
  for (const KnownFragment& k : mv.received) {
    if (mv.sections.contains(k.section)) continue;
    auto section = std::span(sigma.bits).subspan(static_cast<std::size_t>(k.section - 1) * n, n);
    for (std::size_t q = 0; q < k.fragment.positions.size(); ++q) {
      section[k.fragment.positions[q]] = k.fragment.values[q];
    }
  }
  return sigma;
}

Fraction optimal_error_rate(const ValidatedParams& p, Level l, Level l_lower) {
  return (p.s(l) + p.s(l_lower)) * Fraction(1, 2);
}

Signature tamper_attempt(const CoalitionView& view, const ValidatedParams& p, MessageId x, Level l,
                         Level l_lower, ParticipantId target_pass, ParticipantId target_fail,
                         RandomStream& stream, std::optional<Fraction> error_rate) {
  if (!view.coalition.has_signer()) {
    throw RoleError("tampering needs the signer in the coalition");
  }
  if (!(l_lower < l) || l_lower < -1 || l > p.l_max()) {
    throw LevelOrderError("need -1 <= l' < l <= l_max, got l=" + std::to_string(l) +
                          " l'=" + std::to_string(l_lower));
  }
  require_honest(view, p, target_pass, "target_pass");
  require_honest(view, p, target_fail, "target_fail");
  if (target_pass == target_fail) {
    throw RoleError("target_pass and target_fail must differ");
  }

  const Fraction p_e = error_rate ? *error_rate : optimal_error_rate(p, l, l_lower);
  const CoalitionMessageView& mv = view.message(x);
  const std::uint32_t n = p.n();

  Signature sigma;
  sigma.message = x;
  sigma.bits = *mv.signature;

  for (const KnownFragment& k : mv.created) {
    if (k.tester != target_fail) continue;
    auto section = std::span(sigma.bits).subspan(static_cast<std::size_t>(k.section - 1) * n, n);
    for (std::uint32_t pos : k.fragment.positions) section[pos] ^= 1u;
  }
  for (ParticipantId j = 1; j <= p.num_recipients(); ++j) {
    if (view.coalition.contains(j)) continue;
    auto section = std::span(sigma.bits).subspan(static_cast<std::size_t>(j - 1) * n, n);
    for (auto& b : section) {
      if (stream.bernoulli(p_e)) b ^= 1u;
    }
  }
  return sigma;
}

}  // namespace uss
