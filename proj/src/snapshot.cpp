#include "uss/snapshot.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include "uss/errors.hpp"

namespace uss {
namespace {

constexpr std::array<char, 4> kMagic = {'U', 'S', 'S', 'S'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint32_t kMaxCount = 1u << 26;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.put(static_cast<char>((u >> (8 * i)) & 0xff));
  }

  void bits(const Bits& b) {
    put<std::uint32_t>(static_cast<std::uint32_t>(b.size()));
    const auto bytes = pack_bits(b);
    out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }

  void fragment(const Fragment& f) {
    bits(f.values);
    put<std::uint32_t>(static_cast<std::uint32_t>(f.positions.size()));
    for (std::uint32_t pos : f.positions) put(pos);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw SnapshotFormatError("truncated snapshot");
      u |= static_cast<U>(static_cast<U>(c & 0xff) << (8 * i));
    }
    return static_cast<T>(u);
  }

  std::uint32_t count() {
    const auto c = get<std::uint32_t>();
    if (c > kMaxCount) throw SnapshotFormatError("implausible element count " + std::to_string(c));
    return c;
  }

  Bits bits() {
    const std::uint32_t len = count();
    std::vector<std::uint8_t> bytes((len + 7) / 8);
    in_.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in_.gcount() != static_cast<std::streamsize>(bytes.size())) {
      throw SnapshotFormatError("truncated bit string");
    }
    return unpack_bits(bytes, len);
  }

  Fragment fragment() {
    Fragment f;
    f.values = bits();
    f.positions.resize(count());
    for (auto& pos : f.positions) pos = get<std::uint32_t>();
    return f;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_snapshot(std::ostream& out, const Snapshot& s) {
  out.write(kMagic.data(), kMagic.size());
  Writer w(out);
  w.put(kVersion);

  const ProtocolParams& p = s.params;
  w.put(p.num_recipients);
  w.put(p.n);
  w.put(p.num_messages);
  w.put(p.dishonest_fraction.num());
  w.put(p.dishonest_fraction.den());
  w.put(p.l_max);
  w.put(static_cast<std::uint32_t>(p.s_thresholds.size()));
  for (const auto& [level, value] : p.s_thresholds) {
    w.put<std::int32_t>(level);
    w.put(value.num());
    w.put(value.den());
  }
  w.put(p.master_seed);

  w.put(static_cast<std::uint32_t>(s.signer.signatures.size()));
  for (std::size_t x = 0; x < s.signer.signatures.size(); ++x) {
    w.put(s.signer.signatures[x].message);
    w.bits(s.signer.signatures[x].bits);
    w.put<std::uint8_t>(s.signer.used[x] ? 1 : 0);
  }

  w.put(static_cast<std::uint32_t>(s.recipients.size()));
  for (const RecipientState& r : s.recipients) {
    w.put(r.id);
    w.put(static_cast<std::uint32_t>(r.messages.size()));
    for (const RecipientMessage& rm : r.messages) {
      w.bits(rm.own_section);
      w.put(static_cast<std::uint32_t>(rm.row.size()));
      for (const Fragment& f : rm.row) w.fragment(f);
      w.put(static_cast<std::uint32_t>(rm.created.size()));
      for (const Fragment& f : rm.created) w.fragment(f);
    }
  }
}

Snapshot read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kMagic) {
    throw SnapshotFormatError("missing USSS header");
  }
  Reader r(in);
  if (const auto version = r.get<std::uint16_t>(); version != kVersion) {
    throw SnapshotFormatError("unsupported snapshot version " + std::to_string(version));
  }

  Snapshot s;
  ProtocolParams& p = s.params;
  p.num_recipients = r.get<std::uint32_t>();
  p.n = r.get<std::uint32_t>();
  p.num_messages = r.get<std::uint32_t>();
  const auto df_num = r.get<std::int64_t>();
  const auto df_den = r.get<std::int64_t>();
  if (df_den <= 0) throw SnapshotFormatError("bad dishonest fraction");
  p.dishonest_fraction = Fraction(df_num, df_den);
  p.l_max = r.get<std::int32_t>();
  for (std::uint32_t k = r.count(); k > 0; --k) {
    const auto level = r.get<std::int32_t>();
    const auto num = r.get<std::int64_t>();
    const auto den = r.get<std::int64_t>();
    if (den <= 0) throw SnapshotFormatError("bad threshold fraction");
    p.s_thresholds[level] = Fraction(num, den);
  }
  p.master_seed = r.get<std::uint64_t>();

  const std::uint32_t sigs = r.count();
  s.signer.signatures.resize(sigs);
  s.signer.used.resize(sigs);
  for (std::uint32_t x = 0; x < sigs; ++x) {
    s.signer.signatures[x].message = r.get<std::uint32_t>();
    s.signer.signatures[x].bits = r.bits();
    s.signer.used[x] = r.get<std::uint8_t>() != 0;
  }

  s.recipients.resize(r.count());
  for (RecipientState& rs : s.recipients) {
    rs.id = r.get<std::uint32_t>();
    rs.messages.resize(r.count());
    for (RecipientMessage& rm : rs.messages) {
      rm.own_section = r.bits();
      rm.row.resize(r.count());
      for (Fragment& f : rm.row) f = r.fragment();
      rm.created.resize(r.count());
      for (Fragment& f : rm.created) f = r.fragment();
    }
  }

  // Structural consistency with the parameters it claims.
  const std::uint32_t big_n = p.num_recipients;
  if (s.recipients.size() != big_n || sigs != p.num_messages) {
    throw SnapshotFormatError("participant or message counts disagree with parameters");
  }
  for (const RecipientState& rs : s.recipients) {
    if (rs.messages.size() != p.num_messages) throw SnapshotFormatError("recipient message count mismatch");
    for (const RecipientMessage& rm : rs.messages) {
      if (rm.row.size() != big_n || rm.created.size() != big_n || rm.own_section.size() != p.n) {
        throw SnapshotFormatError("recipient " + std::to_string(rs.id) + " has malformed rows");
      }
    }
  }
  return s;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotFormatError("cannot write " + path.string());
  write_snapshot(out, s);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotFormatError("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace uss
