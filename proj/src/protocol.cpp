#include "uss/protocol.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "uss/errors.hpp"

namespace uss {
namespace {

Bits encode_fragment(const Fragment& f, std::uint32_t width) {
  Bits payload(f.values.begin(), f.values.end());
  payload.reserve(f.values.size() * (1 + width));
  for (std::uint32_t pos : f.positions) append_uint(payload, pos, width);
  return payload;
}

Fragment decode_fragment(BitSpan payload, std::uint32_t m, std::uint32_t n, std::uint32_t width) {
  if (payload.size() != static_cast<std::size_t>(m) * (1 + width)) {
    throw AuthFailure("fragment payload has " + std::to_string(payload.size()) + " bits");
  }
  Fragment f;
  f.values.assign(payload.begin(), payload.begin() + m);
  f.positions.reserve(m);
  for (std::uint32_t k = 0; k < m; ++k) {
    const auto pos = static_cast<std::uint32_t>(read_uint(payload, m + static_cast<std::size_t>(k) * width, width));
    if (pos >= n || (!f.positions.empty() && pos <= f.positions.back())) {
      throw AuthFailure("fragment positions are not a strictly increasing subset of the section");
    }
    f.positions.push_back(pos);
  }
  return f;
}

}  // namespace

const RecipientMessage& RecipientState::message(MessageId x) const {
  if (x >= messages.size()) {
    throw UnknownMessage("message " + std::to_string(x) + " is not in the message set");
  }
  return messages[x];
}

void Transcript::write_jsonl(std::ostream& out) const {
  for (const auto& r : records) {
    out << "{\"step\":\"" << r.step << "\",\"sender\":" << r.sender << ",\"receiver\":" << r.receiver
        << ",\"message\":" << r.message << ",\"sequence\":" << r.sequence
        << ",\"payload_bits\":" << r.payload_bits << ",\"tag\":\"" << std::hex << r.tag << std::dec
        << "\"}\n";
  }
}

std::vector<std::vector<std::uint32_t>> partition_positions(RandomStream& stream, std::uint32_t n,
                                                            std::uint32_t parts) {
  if (parts == 0 || n % parts != 0) {
    throw DivisibilityError("cannot split " + std::to_string(n) + " positions into " +
                            std::to_string(parts) + " equal sets");
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  for (std::uint32_t i = n; i > 1; --i) {
    const auto j = static_cast<std::uint32_t>(stream.uniform_below(i));
    std::swap(order[i - 1], order[j]);
  }
  const std::uint32_t m = n / parts;
  std::vector<std::vector<std::uint32_t>> sets(parts);
  for (std::uint32_t k = 0; k < parts; ++k) {
    sets[k].assign(order.begin() + static_cast<std::ptrdiff_t>(k) * m,
                   order.begin() + static_cast<std::ptrdiff_t>(k + 1) * m);
    std::sort(sets[k].begin(), sets[k].end());
  }
  return sets;
}

Distribution run_distribution(const ValidatedParams& p, KeyPool& pool, const ChannelTap& tap) {
  const std::uint32_t big_n = p.num_recipients();
  const std::uint32_t n = p.n();
  const std::uint32_t m = p.fragment_bits();
  const std::uint32_t width = position_width(n);
  const MessageId messages = p.num_messages();

  Distribution d;
  d.recipients.resize(big_n);
  for (ParticipantId i = 1; i <= big_n; ++i) {
    auto& r = d.recipients[i - 1];
    r.id = i;
    r.messages.resize(messages);
    for (auto& rm : r.messages) {
      rm.row.resize(big_n);
      rm.created.resize(big_n);
    }
  }

  auto transmit = [&](const char* step, ParticipantId from, ParticipantId to, MessageId x,
                      BitSpan payload) {
    AuthenticatedEnvelope e = pool.secure_send(from, to, payload);
    d.transcript.records.push_back({step, from, to, x, e.sequence, e.ciphertext.size(), e.tag});
    if (tap) tap(e);
    return pool.secure_recv(e);
  };

  // Signer draws sigma^x and sends section i to P_i.
  d.signer.signatures.resize(messages);
  d.signer.used.assign(messages, false);
  for (MessageId x = 0; x < messages; ++x) {
    RandomStream stream(p.master_seed(), Purpose::kSignature, kSigner, x);
    Signature& sigma = d.signer.signatures[x];
    sigma.message = x;
    sigma.bits.resize(p.signature_bits());
    for (auto& b : sigma.bits) b = stream.bit();
    for (ParticipantId i = 1; i <= big_n; ++i) {
      d.recipients[i - 1].messages[x].own_section = transmit("section", kSigner, i, x, sigma.section(i, n));
    }
  }

  // Each recipient partitions its section's positions and forms one fragment per recipient.
  for (ParticipantId i = 1; i <= big_n; ++i) {
    for (MessageId x = 0; x < messages; ++x) {
      RandomStream stream(p.master_seed(), Purpose::kPartition, i, x);
      auto sets = partition_positions(stream, n, big_n);
      RecipientMessage& rm = d.recipients[i - 1].messages[x];
      for (ParticipantId k = 1; k <= big_n; ++k) {
        Fragment f;
        f.positions = std::move(sets[k - 1]);
        f.values.reserve(m);
        for (std::uint32_t pos : f.positions) f.values.push_back(rm.own_section[pos]);
        rm.created[k - 1] = std::move(f);
      }
      rm.row[i - 1] = rm.created[i - 1];  // kept back as the self-test fragment
    }
  }

  // Fragments travel P_i -> P_j for every i != j.
  for (MessageId x = 0; x < messages; ++x) {
    for (ParticipantId i = 1; i <= big_n; ++i) {
      for (ParticipantId j = 1; j <= big_n; ++j) {
        if (i == j) continue;
        const Bits payload = encode_fragment(d.recipients[i - 1].messages[x].created[j - 1], width);
        const Bits received = transmit("fragment", i, j, x, payload);
        d.recipients[j - 1].messages[x].row[i - 1] = decode_fragment(received, m, n, width);
      }
    }
  }
  return d;
}

Signature sign(SignerState& signer, MessageId x) {
  if (x >= signer.signatures.size()) {
    throw UnknownMessage("message " + std::to_string(x) + " is not in the message set");
  }
  if (signer.used[x]) {
    throw ReusedMessage("message " + std::to_string(x) + " has already been signed");
  }
  signer.used[x] = true;
  return signer.signatures[x];
}

std::uint32_t fragment_mismatches(const Fragment& fragment, BitSpan section_bits) {
  std::uint32_t h = 0;
  for (std::size_t k = 0; k < fragment.positions.size(); ++k) {
    h += section_bits[fragment.positions[k]] != fragment.values[k];
  }
  return h;
}

bool test_passes(const ValidatedParams& p, std::uint32_t mismatches, Level l) {
  const Fraction& s = p.s(l);
  // h < s * m  <=>  h * den < num * m
  return static_cast<std::int64_t>(mismatches) * s.den() <
         s.num() * static_cast<std::int64_t>(p.fragment_bits());
}

int fragment_test(const ValidatedParams& p, const RecipientState& r, MessageId x, std::uint32_t section,
                  BitSpan section_bits, Level l) {
  p.s(l);  // range check before any work
  if (section < 1 || section > p.num_recipients()) {
    throw std::out_of_range("section index " + std::to_string(section));
  }
  if (section_bits.size() != p.n()) {
    throw std::invalid_argument("section has " + std::to_string(section_bits.size()) + " bits, expected " +
                                std::to_string(p.n()));
  }
  const Fragment& f = r.message(x).row[section - 1];
  return test_passes(p, fragment_mismatches(f, section_bits), l) ? 1 : 0;
}

std::vector<std::uint32_t> section_mismatches(const ValidatedParams& p, const RecipientState& r,
                                              MessageId x, BitSpan sigma) {
  if (sigma.size() != p.signature_bits()) {
    throw std::invalid_argument("signature has " + std::to_string(sigma.size()) + " bits, expected " +
                                std::to_string(p.signature_bits()));
  }
  const RecipientMessage& rm = r.message(x);
  const std::uint32_t n = p.n();
  std::vector<std::uint32_t> out(p.num_recipients());
  for (std::uint32_t j = 1; j <= p.num_recipients(); ++j) {
    out[j - 1] = fragment_mismatches(rm.row[j - 1], sigma.subspan(static_cast<std::size_t>(j - 1) * n, n));
  }
  return out;
}

std::vector<std::uint32_t> section_mismatches(const ValidatedParams& p, const RecipientState& r,
                                              const Signature& sigma) {
  return section_mismatches(p, r, sigma.message, sigma.bits);
}

bool accepts(const ValidatedParams& p, std::span<const std::uint32_t> mismatches, Level l) {
  const Fraction f = fraction_threshold(p, l);
  std::int64_t passing = 0;
  for (std::uint32_t h : mismatches) passing += test_passes(p, h, l);
  // passing > N * f_l  <=>  passing * den > N * num
  return passing * f.den() > static_cast<std::int64_t>(p.num_recipients()) * f.num();
}

std::uint32_t passing_tests(const ValidatedParams& p, const RecipientState& r, const Signature& sigma,
                            Level l) {
  p.s(l);
  std::uint32_t count = 0;
  for (std::uint32_t h : section_mismatches(p, r, sigma)) count += test_passes(p, h, l);
  return count;
}

bool verify(const ValidatedParams& p, const RecipientState& r, MessageId x, BitSpan sigma, Level l) {
  p.s(l);
  return accepts(p, section_mismatches(p, r, x, sigma), l);
}

bool verify(const ValidatedParams& p, const RecipientState& r, const Signature& sigma, Level l) {
  return verify(p, r, sigma.message, sigma.bits, l);
}

}  // namespace uss
