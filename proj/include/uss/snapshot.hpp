#pragma once

#include <filesystem>
#include <iosfwd>

#include "uss/params.hpp"
#include "uss/protocol.hpp"

namespace uss {

/// Post-distribution state of every participant, so attacks can be replayed
/// against fixed verification matrices.
struct Snapshot {
  ProtocolParams params;
  SignerState signer;
  std::vector<RecipientState> recipients;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Versioned little-endian binary, magic "USSS".
void write_snapshot(std::ostream& out, const Snapshot& s);
Snapshot read_snapshot(std::istream& in);

void save_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace uss
