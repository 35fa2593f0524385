#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uss/fraction.hpp"

namespace uss {

using ParticipantId = std::uint32_t;  // 0 is the signer, 1..N the recipients
using MessageId = std::uint32_t;
using Level = int;                    // -1 .. l_max

inline constexpr ParticipantId kSigner = 0;

/// Public protocol constants, as written in a config file. Not yet checked.
struct ProtocolParams {
  std::uint32_t num_recipients = 0;  // N
  std::uint32_t n = 0;               // bits per section
  std::uint32_t num_messages = 0;    // M
  Fraction dishonest_fraction;       // d_f
  std::int32_t l_max = 0;
  std::map<Level, Fraction> s_thresholds;  // per-fragment mismatch tolerance
  std::uint64_t master_seed = 0;

  friend bool operator==(const ProtocolParams&, const ProtocolParams&) = default;
};

/// Immutable, checked parameter set. Only `validate_params` creates one.
class ValidatedParams {
 public:
  const ProtocolParams& raw() const { return params_; }

  std::uint32_t num_recipients() const { return params_.num_recipients; }
  std::uint32_t n() const { return params_.n; }
  std::uint32_t num_messages() const { return params_.num_messages; }
  std::uint32_t fragment_bits() const { return params_.n / params_.num_recipients; }
  std::uint32_t signature_bits() const { return params_.n * params_.num_recipients; }
  const Fraction& dishonest_fraction() const { return params_.dishonest_fraction; }
  Level l_max() const { return params_.l_max; }
  std::uint64_t master_seed() const { return params_.master_seed; }

  /// s_l. Throws LevelOutOfRange outside -1..l_max.
  const Fraction& s(Level l) const;

  /// Largest number of recipients a coalition may hold: floor(N * d_f).
  std::uint32_t coalition_capacity() const;

  /// Advisory notes produced during validation (e.g. n small relative to N).
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Same public constants with a different seed; no re-validation needed.
  ValidatedParams with_seed(std::uint64_t seed) const;

  friend bool operator==(const ValidatedParams& a, const ValidatedParams& b) {
    return a.params_ == b.params_;
  }

 private:
  friend ValidatedParams validate_params(const ProtocolParams& p);
  ProtocolParams params_;
  std::vector<std::string> warnings_;
};

ValidatedParams validate_params(const ProtocolParams& p);
inline ValidatedParams validate_params(const ValidatedParams& p) { return validate_params(p.raw()); }

/// f_l = 1/2 + (l+1) d_f, exact.
Fraction fraction_threshold(const ValidatedParams& p, Level l);

struct KeyBudget {
  std::uint64_t signer_link_bits = 0;  // per signer-recipient link
  std::uint64_t peer_link_bits = 0;    // per recipient-recipient link

  friend bool operator==(const KeyBudget&, const KeyBudget&) = default;
};

/// One-time-pad payload bits needed by the distribution stage; excludes tag keys.
KeyBudget key_budget(const ValidatedParams& p);

/// ceil(log2 n) for n >= 1; the width of one encoded position.
std::uint32_t position_width(std::uint32_t n);

}  // namespace uss
