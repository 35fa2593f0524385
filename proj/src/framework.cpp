#include "uss/framework.hpp"

#include <algorithm>

#include "uss/errors.hpp"

namespace uss {
namespace {

// accepted[i-1][l+1] for honest i; dishonest rows stay empty.
using VerifyTable = std::vector<std::vector<bool>>;

VerifyTable honest_table(const LeveledVerifier& v, const Coalition& c, MessageId x, BitSpan sigma) {
  VerifyTable table(v.num_recipients());
  for (ParticipantId i = 1; i <= v.num_recipients(); ++i) {
    if (c.contains(i)) continue;
    auto& row = table[i - 1];
    row.resize(static_cast<std::size_t>(v.max_level()) + 2);
    for (Level l = -1; l <= v.max_level(); ++l) row[l + 1] = v.verify(i, x, sigma, l);
  }
  return table;
}

Bits signature_from_index(std::uint64_t index, std::uint32_t bits) {
  Bits sigma(bits);
  for (std::uint32_t k = 0; k < bits; ++k) sigma[k] = (index >> k) & 1u;
  return sigma;
}

void check_enumerable(const LeveledVerifier& v) {
  if (v.signature_bits() > kMaxEnumerableBits) {
    throw InstanceTooLarge("K=" + std::to_string(v.signature_bits()) + " exceeds the enumeration limit of " +
                           std::to_string(kMaxEnumerableBits) + " bits");
  }
}

}  // namespace

std::optional<Level> LeveledVerifier::highest_level(ParticipantId i, MessageId x, BitSpan sigma) const {
  for (Level l = max_level(); l >= -1; --l) {
    if (verify(i, x, sigma, l)) return l;
  }
  return std::nullopt;
}

bool ProtocolVerifier::verify(ParticipantId i, MessageId x, BitSpan sigma, Level l) const {
  if (i < 1 || i > recipients_.size()) {
    throw std::out_of_range("recipient " + std::to_string(i));
  }
  if (l == params_.l_max() + 1) return false;
  return uss::verify(params_, recipients_[i - 1], x, sigma, l);
}

std::optional<Level> ProtocolVerifier::highest_level(ParticipantId i, MessageId x, BitSpan sigma) const {
  if (i < 1 || i > recipients_.size()) {
    throw std::out_of_range("recipient " + std::to_string(i));
  }
  const auto mismatches = section_mismatches(params_, recipients_[i - 1], x, sigma);
  for (Level l = params_.l_max(); l >= -1; --l) {
    if (accepts(params_, mismatches, l)) return l;
  }
  return std::nullopt;
}

std::vector<ParticipantId> Coalition::recipient_members() const {
  std::vector<ParticipantId> out;
  for (ParticipantId id : members) {
    if (id != kSigner) out.push_back(id);
  }
  return out;
}

std::vector<ParticipantId> Coalition::honest_recipients(std::uint32_t num_recipients) const {
  std::vector<ParticipantId> out;
  for (ParticipantId i = 1; i <= num_recipients; ++i) {
    if (!contains(i)) out.push_back(i);
  }
  return out;
}

SignatureClassification classify_signature(const LeveledVerifier& v, MessageId x, BitSpan sigma,
                                           std::optional<BitSpan> authentic_ref) {
  SignatureClassification c;
  c.authentic = authentic_ref && std::equal(sigma.begin(), sigma.end(), authentic_ref->begin(),
                                            authentic_ref->end());
  const Level top = v.max_level();

  for (ParticipantId i = 1; i <= v.num_recipients(); ++i) {
    std::optional<Level> best;
    for (Level l = 0; l <= top; ++l) {
      if (v.verify(i, x, sigma, l)) best = l;
    }
    c.per_recipient_max_level[i] = best;
    if (v.verify(i, x, sigma, 0)) c.acceptable_by.insert(i);
  }
  c.valid = c.acceptable_by.size() == v.num_recipients();
  if (!c.valid) c.fraudulent_for = c.acceptable_by;

  for (Level l = top; l >= 0; --l) {
    bool everyone = true;
    for (ParticipantId i = 1; i <= v.num_recipients() && everyone; ++i) everyone = v.verify(i, x, sigma, l);
    if (everyone) {
      c.l_transferable = l;
      break;
    }
  }
  return c;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kValid: return "Valid";
    case Verdict::kInvalid: return "Invalid";
    case Verdict::kTransferable: return "transferable";
    case Verdict::kNotTransferable: return "not-transferable";
  }
  return "?";
}

DisputeVerdict mv_dispute(const LeveledVerifier& v, MessageId x, BitSpan sigma) {
  DisputeVerdict d;
  for (ParticipantId i = 1; i <= v.num_recipients(); ++i) {
    if (v.verify(i, x, sigma, -1)) d.accepting.insert(i);
  }
  d.verdict = 2 * d.accepting.size() > v.num_recipients() ? Verdict::kValid : Verdict::kInvalid;
  return d;
}

DisputeVerdict mv_transfer_dispute(const LeveledVerifier& v, MessageId x, BitSpan sigma, Level l) {
  if (l < 0 || l > v.max_level()) {
    throw LevelOutOfRange("transfer dispute level " + std::to_string(l) + " outside 0.." +
                          std::to_string(v.max_level()));
  }
  DisputeVerdict d;
  for (ParticipantId i = 1; i <= v.num_recipients(); ++i) {
    if (v.verify(i, x, sigma, l - 1)) d.accepting.insert(i);
  }
  d.verdict = 2 * d.accepting.size() > v.num_recipients() ? Verdict::kTransferable : Verdict::kNotTransferable;
  return d;
}

int attack_indicator(AttackKind kind, const Coalition& coalition, const LeveledVerifier& v, MessageId x,
                     BitSpan sigma, std::optional<Level> l, ForgeTarget target) {
  const std::uint32_t big_n = v.num_recipients();
  switch (kind) {
    case AttackKind::kForgery: {
      if (coalition.has_signer()) {
        throw CoalitionRoleError("a forging coalition cannot contain the signer");
      }
      if (target.fixed) {
        const ParticipantId t = *target.fixed;
        if (t < 1 || t > big_n || coalition.contains(t)) {
          throw CoalitionRoleError("forgery target " + std::to_string(t) + " is not an honest recipient");
        }
        return v.verify(t, x, sigma, 0) ? 1 : 0;
      }
      for (ParticipantId i : coalition.honest_recipients(big_n)) {
        if (v.verify(i, x, sigma, 0)) return 1;
      }
      return 0;
    }

    case AttackKind::kRepudiation: {
      if (!coalition.has_signer()) {
        throw CoalitionRoleError("repudiation requires the signer in the coalition");
      }
      bool acceptable = false;
      for (ParticipantId i : coalition.honest_recipients(big_n)) {
        if (v.verify(i, x, sigma, 0)) {
          acceptable = true;
          break;
        }
      }
      if (!acceptable) return 0;
      return mv_dispute(v, x, sigma).verdict == Verdict::kInvalid ? 1 : 0;
    }

    case AttackKind::kNonTransferability: {
      if (!coalition.has_signer()) {
        throw CoalitionRoleError("non-transferability requires the signer in the coalition");
      }
      if (!l || *l < 1 || *l > v.max_level()) {
        throw LevelOutOfRange("non-transferability level must lie in 1.." + std::to_string(v.max_level()));
      }
      const Level level = *l;
      const VerifyTable table = honest_table(v, coalition, x, sigma);
      const auto honest = coalition.honest_recipients(big_n);
      for (ParticipantId i : honest) {
        if (!table[i - 1][level + 1]) continue;
        for (ParticipantId j : honest) {
          if (j == i) continue;
          for (Level lower = 0; lower < level; ++lower) {
            if (!table[j - 1][lower + 1]) return 1;
          }
        }
      }
      return 0;
    }
  }
  return 0;
}

int forgery_upheld_by_dispute(const Coalition& coalition, const LeveledVerifier& v, MessageId x,
                              BitSpan sigma) {
  if (attack_indicator(AttackKind::kForgery, coalition, v, x, sigma) == 0) return 0;
  return mv_dispute(v, x, sigma).verdict == Verdict::kValid ? 1 : 0;
}

std::vector<bool> acceptance_set(const LeveledVerifier& v, MessageId x, ParticipantId i, Level l) {
  check_enumerable(v);
  const std::uint32_t bits = v.signature_bits();
  const std::uint64_t space = 1ull << bits;
  std::vector<bool> set(space);
  for (std::uint64_t s = 0; s < space; ++s) {
    set[s] = v.verify(i, x, signature_from_index(s, bits), l);
  }
  return set;
}

SetReport enumerate_acceptance_sets(const LeveledVerifier& v, MessageId x, const Coalition& coalition,
                                    Level l) {
  check_enumerable(v);
  const std::uint32_t bits = v.signature_bits();
  const std::uint64_t space = 1ull << bits;
  const auto members = coalition.recipient_members();
  const auto honest = coalition.honest_recipients(v.num_recipients());

  SetReport report;
  report.signature_space = space;
  report.honest.resize(honest.size());
  for (std::size_t k = 0; k < honest.size(); ++k) report.honest[k].id = honest[k];

  for (std::uint64_t s = 0; s < space; ++s) {
    const Bits sigma = signature_from_index(s, bits);
    bool in_coalition_set = true;
    for (ParticipantId c : members) {
      if (!v.verify(c, x, sigma, l)) {
        in_coalition_set = false;
        break;
      }
    }
    report.coalition_accepted += in_coalition_set;
    for (auto& h : report.honest) {
      if (v.verify(h.id, x, sigma, l)) {
        ++h.accepted;
        h.accepted_by_both += in_coalition_set;
      }
    }
  }

  for (auto& h : report.honest) {
    h.size_ratio = static_cast<double>(h.accepted) / static_cast<double>(space);
    h.forge_ratio = report.coalition_accepted == 0
                        ? 0.0
                        : static_cast<double>(h.accepted_by_both) / static_cast<double>(report.coalition_accepted);
  }
  return report;
}

}  // namespace uss
