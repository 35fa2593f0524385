#include "uss/keystore.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "uss/errors.hpp"
#include "uss/rng.hpp"

namespace uss {
namespace {

constexpr std::array<char, 4> kKeyMagic = {'U', 'S', 'S', 'K'};
constexpr std::uint16_t kKeyVersion = 1;
constexpr std::size_t kKeyHeaderBytes = 16;

std::string pair_name(ParticipantId a, ParticipantId b) {
  return "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

std::uint64_t key_word(const Bits& key, std::uint64_t offset) {
  return read_uint(key, offset, 64);
}

std::uint64_t envelope_tag(const AuthenticatedEnvelope& e, std::uint64_t hash_key,
                           std::uint64_t pad) {
  std::vector<std::uint64_t> words;
  words.reserve(3 + (e.ciphertext.size() + 63) / 64);
  words.push_back(e.sequence);
  words.push_back((static_cast<std::uint64_t>(e.sender) << 32) | e.receiver);
  words.push_back(e.ciphertext.size());
  for (std::size_t i = 0; i < e.ciphertext.size(); i += 64) {
    const auto width = static_cast<std::uint32_t>(std::min<std::size_t>(64, e.ciphertext.size() - i));
    words.push_back(read_uint(e.ciphertext, i, width));
  }
  return poly_hash(words, hash_key) ^ pad;
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(bytes, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_le(const std::uint8_t* p, int bytes) {
  std::uint32_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::uint64_t gf64_mul(std::uint64_t a, std::uint64_t b) {
  constexpr std::uint64_t kReduction = 0x1b;  // x^4 + x^3 + x + 1
  std::uint64_t result = 0;
  while (b != 0) {
    if (b & 1u) result ^= a;
    b >>= 1;
    const bool carry = (a >> 63) != 0;
    a <<= 1;
    if (carry) a ^= kReduction;
  }
  return result;
}

std::uint64_t poly_hash(std::span<const std::uint64_t> words, std::uint64_t key) {
  std::uint64_t h = 0;
  for (std::uint64_t w : words) h = gf64_mul(h ^ w, key);
  return h;
}

std::pair<ParticipantId, ParticipantId> KeyPool::normalize(ParticipantId a, ParticipantId b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

KeyPool::Link& KeyPool::link(ParticipantId a, ParticipantId b) {
  auto it = links_.find(normalize(a, b));
  if (it == links_.end()) {
    throw KeyExhaustedError("no key material for pair " + pair_name(a, b));
  }
  return it->second;
}

const KeyPool::Link& KeyPool::link(ParticipantId a, ParticipantId b) const {
  auto it = links_.find(normalize(a, b));
  if (it == links_.end()) {
    throw KeyExhaustedError("no key material for pair " + pair_name(a, b));
  }
  return it->second;
}

void KeyPool::add_link(ParticipantId a, ParticipantId b, Bits key) {
  if (a == b) {
    throw std::invalid_argument("a key link needs two distinct participants");
  }
  Link l;
  l.usage.capacity = key.size();
  l.key = std::move(key);
  links_[normalize(a, b)] = std::move(l);
}

bool KeyPool::has_link(ParticipantId a, ParticipantId b) const {
  return links_.contains(normalize(a, b));
}

std::uint64_t KeyPool::capacity(ParticipantId a, ParticipantId b) const {
  return link(a, b).usage.capacity;
}

std::uint64_t KeyPool::consumed(ParticipantId a, ParticipantId b) const {
  return link(a, b).usage.consumed();
}

std::uint64_t KeyPool::available(ParticipantId a, ParticipantId b) const {
  const Link& l = link(a, b);
  return l.usage.capacity - l.usage.consumed();
}

LinkUsage KeyPool::usage(ParticipantId a, ParticipantId b) const { return link(a, b).usage; }

const Bits& KeyPool::key(ParticipantId a, ParticipantId b) const { return link(a, b).key; }

std::vector<std::pair<ParticipantId, ParticipantId>> KeyPool::pairs() const {
  std::vector<std::pair<ParticipantId, ParticipantId>> out;
  out.reserve(links_.size());
  for (const auto& [pair, _] : links_) out.push_back(pair);
  return out;
}

AuthenticatedEnvelope KeyPool::secure_send(ParticipantId a, ParticipantId b, BitSpan payload) {
  Link& l = link(a, b);
  const std::uint64_t need = payload.size() + 2ull * kTagBits;
  const std::uint64_t offset = l.usage.consumed();
  if (l.usage.capacity - offset < need) {
    throw KeyExhaustedError("pair " + pair_name(a, b) + " has " +
                            std::to_string(l.usage.capacity - offset) + " bits left, envelope needs " +
                            std::to_string(need));
  }

  AuthenticatedEnvelope e;
  e.sender = a;
  e.receiver = b;
  e.sequence = l.next_send_sequence++;
  e.ciphertext.resize(payload.size());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    e.ciphertext[i] = payload[i] ^ l.key[offset + i];
  }
  const std::uint64_t tag_offset = offset + payload.size();
  e.tag = envelope_tag(e, key_word(l.key, tag_offset), key_word(l.key, tag_offset + 64));

  l.usage.payload_bits += payload.size();
  l.usage.tag_key_bits += 2ull * kTagBits;
  ++l.usage.envelopes;
  return e;
}

Bits KeyPool::secure_recv(const AuthenticatedEnvelope& e) {
  Link& l = link(e.sender, e.receiver);
  if (e.sequence != l.next_recv_sequence) {
    throw AuthFailure("pair " + pair_name(e.sender, e.receiver) + " expected sequence " +
                      std::to_string(l.next_recv_sequence) + ", got " + std::to_string(e.sequence));
  }
  const std::uint64_t need = e.ciphertext.size() + 2ull * kTagBits;
  const std::uint64_t offset = l.recv_cursor;
  if (l.usage.capacity < offset + need) {
    throw KeyExhaustedError("pair " + pair_name(e.sender, e.receiver) +
                            " has no key left for an envelope of " +
                            std::to_string(e.ciphertext.size()) + " bits");
  }
  const std::uint64_t tag_offset = offset + e.ciphertext.size();
  const std::uint64_t expected =
      envelope_tag(e, key_word(l.key, tag_offset), key_word(l.key, tag_offset + 64));
  l.recv_cursor += need;
  ++l.next_recv_sequence;
  if (expected != e.tag) {
    throw AuthFailure("tag mismatch on pair " + pair_name(e.sender, e.receiver) + " sequence " +
                      std::to_string(e.sequence));
  }

  Bits plain(e.ciphertext.size());
  for (std::size_t i = 0; i < plain.size(); ++i) plain[i] = e.ciphertext[i] ^ l.key[offset + i];
  return plain;
}

LinkRequirement signer_link_requirement(const ValidatedParams& p) {
  LinkRequirement r;
  r.payload_bits = key_budget(p).signer_link_bits;
  r.envelopes = p.num_messages();  // one section per message
  r.tag_key_bits = r.envelopes * 2ull * KeyPool::kTagBits;
  return r;
}

LinkRequirement peer_link_requirement(const ValidatedParams& p) {
  LinkRequirement r;
  r.payload_bits = key_budget(p).peer_link_bits;
  r.envelopes = 2ull * p.num_messages();  // one fragment each way per message
  r.tag_key_bits = r.envelopes * 2ull * KeyPool::kTagBits;
  return r;
}

KeyPool provision_keys(const ValidatedParams& p, const KeySource& source) {
  const LinkRequirement signer_req = signer_link_requirement(p);
  const LinkRequirement peer_req = peer_link_requirement(p);
  const ParticipantId last = p.num_recipients();

  KeyPool pool;
  if (const auto* seeded = std::get_if<SeededRandom>(&source)) {
    for (ParticipantId a = 0; a <= last; ++a) {
      for (ParticipantId b = a + 1; b <= last; ++b) {
        const std::uint64_t bits = a == kSigner ? signer_req.total() : peer_req.total();
        RandomStream stream(seeded->seed, Purpose::kKeyMaterial, a, b);
        Bits key(bits);
        for (auto& bit : key) bit = stream.bit();
        pool.add_link(a, b, std::move(key));
      }
    }
    return pool;
  }

  const auto& dir = std::get<FileIngest>(source).directory;
  for (ParticipantId a = 0; a <= last; ++a) {
    for (ParticipantId b = a + 1; b <= last; ++b) {
      const auto path = dir / key_file_name(a, b);
      if (!std::filesystem::exists(path)) {
        throw InsufficientKeyFileError("missing key file " + path.string());
      }
      KeyFile file = read_key_file(path);
      if (std::min(file.a, file.b) != a || std::max(file.a, file.b) != b) {
        throw KeyFileFormatError(path.string() + " holds key for pair " + pair_name(file.a, file.b));
      }
      const std::uint64_t need = a == kSigner ? signer_req.total() : peer_req.total();
      if (file.key.size() < need) {
        throw InsufficientKeyFileError(path.string() + " holds " + std::to_string(file.key.size()) +
                                       " bits, link needs " + std::to_string(need));
      }
      pool.add_link(a, b, std::move(file.key));
    }
  }
  return pool;
}

std::string key_file_name(ParticipantId a, ParticipantId b) {
  auto [lo, hi] = a < b ? std::pair{a, b} : std::pair{b, a};
  return "link_" + std::to_string(lo) + "_" + std::to_string(hi) + ".ussk";
}

void write_key_file(const std::filesystem::path& path, ParticipantId a, ParticipantId b, BitSpan key) {
  if (a > 0xffff || b > 0xffff || key.size() > 0xffffffffull) {
    throw KeyFileFormatError("pair or key length does not fit the key file header");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw KeyFileFormatError("cannot open " + path.string() + " for writing");
  }
  out.write(kKeyMagic.data(), kKeyMagic.size());
  put_u16(out, kKeyVersion);
  put_u16(out, static_cast<std::uint16_t>(a));
  put_u16(out, static_cast<std::uint16_t>(b));
  put_u16(out, 0);
  put_u32(out, static_cast<std::uint32_t>(key.size()));
  const auto bytes = pack_bits(key);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

KeyFile read_key_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw KeyFileFormatError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < kKeyHeaderBytes || !std::equal(kKeyMagic.begin(), kKeyMagic.end(), data.begin())) {
    throw KeyFileFormatError(path.string() + " lacks the USSK header");
  }
  if (get_le(&data[4], 2) != kKeyVersion) {
    throw KeyFileFormatError(path.string() + " has unsupported version " +
                             std::to_string(get_le(&data[4], 2)));
  }
  KeyFile file;
  file.a = get_le(&data[6], 2);
  file.b = get_le(&data[8], 2);
  const std::uint32_t bit_length = get_le(&data[12], 4);
  const std::size_t body = data.size() - kKeyHeaderBytes;
  if (body != (static_cast<std::size_t>(bit_length) + 7) / 8) {
    throw KeyFileFormatError(path.string() + " declares " + std::to_string(bit_length) +
                             " bits but carries " + std::to_string(body) + " bytes");
  }
  if (file.a == file.b) {
    throw KeyFileFormatError(path.string() + " names the same participant twice");
  }
  file.key = unpack_bits(std::span(data).subspan(kKeyHeaderBytes), bit_length);
  return file;
}

void export_keys(const KeyPool& pool, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (const auto& [a, b] : pool.pairs()) {
    write_key_file(directory / key_file_name(a, b), a, b, pool.key(a, b));
  }
}

}  // namespace uss
