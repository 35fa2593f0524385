#include "uss/params.hpp"

#include <bit>

#include "uss/errors.hpp"

namespace uss {

const Fraction& ValidatedParams::s(Level l) const {
  auto it = params_.s_thresholds.find(l);
  if (l < -1 || l > params_.l_max || it == params_.s_thresholds.end()) {
    throw LevelOutOfRange("level " + std::to_string(l) + " outside -1.." +
                          std::to_string(params_.l_max));
  }
  return it->second;
}

std::uint32_t ValidatedParams::coalition_capacity() const {
  const Fraction& df = params_.dishonest_fraction;
  return static_cast<std::uint32_t>((static_cast<std::int64_t>(params_.num_recipients) * df.num()) /
                                    df.den());
}

ValidatedParams ValidatedParams::with_seed(std::uint64_t seed) const {
  ValidatedParams copy = *this;
  copy.params_.master_seed = seed;
  return copy;
}

ValidatedParams validate_params(const ProtocolParams& p) {
  if (p.num_recipients == 0) {
    throw ConfigError("num_recipients must be positive");
  }
  if (p.n == 0) {
    throw ConfigError("n must be positive");
  }
  if (p.n % p.num_recipients != 0) {
    throw DivisibilityError("n=" + std::to_string(p.n) + " is not divisible by N=" +
                            std::to_string(p.num_recipients));
  }
  if (p.l_max < 0) {
    throw ConfigError("l_max must be non-negative");
  }
  const Fraction half(1, 2);
  if (p.dishonest_fraction < Fraction(0) || p.dishonest_fraction >= half) {
    throw ConfigError("dishonest_fraction must lie in [0, 1/2), got " +
                      p.dishonest_fraction.to_string());
  }
  if (Fraction(p.l_max + 1) * p.dishonest_fraction >= half) {
    throw LevelBudgetError("(l_max+1)*d_f = " +
                           (Fraction(p.l_max + 1) * p.dishonest_fraction).to_string() +
                           " is not below 1/2");
  }

  for (Level l = -1; l <= p.l_max; ++l) {
    if (!p.s_thresholds.contains(l)) {
      throw MissingLevelError("no threshold s_" + std::to_string(l));
    }
  }
  for (const auto& [level, value] : p.s_thresholds) {
    if (level < -1 || level > p.l_max) {
      throw MissingLevelError("threshold for undeclared level " + std::to_string(level));
    }
  }

  if (p.s_thresholds.at(-1) >= half) {
    throw ThresholdOrderError("s_-1 = " + p.s_thresholds.at(-1).to_string() + " is not below 1/2");
  }
  for (Level l = 0; l <= p.l_max; ++l) {
    if (!(p.s_thresholds.at(l - 1) > p.s_thresholds.at(l))) {
      throw ThresholdOrderError("s_" + std::to_string(l - 1) + " must exceed s_" +
                                std::to_string(l));
    }
  }
  if (p.s_thresholds.at(p.l_max) <= Fraction(0)) {
    throw ThresholdOrderError("s_" + std::to_string(p.l_max) + " must be positive");
  }

  ValidatedParams out;
  out.params_ = p;
  // n >= alpha * N^(1+delta) with unspecified constants; only a rough nudge here.
  if (static_cast<std::uint64_t>(p.n) < 8ull * p.num_recipients) {
    out.warnings_.push_back("n=" + std::to_string(p.n) + " is small relative to N=" +
                            std::to_string(p.num_recipients) +
                            " (n < 8N); security bounds will be loose");
  }
  return out;
}

Fraction fraction_threshold(const ValidatedParams& p, Level l) {
  if (l < -1 || l > p.l_max()) {
    throw LevelOutOfRange("level " + std::to_string(l) + " outside -1.." +
                          std::to_string(p.l_max()));
  }
  return Fraction(1, 2) + Fraction(l + 1) * p.dishonest_fraction();
}

std::uint32_t position_width(std::uint32_t n) {
  if (n <= 1) return 0;
  return static_cast<std::uint32_t>(std::bit_width(n - 1));
}

KeyBudget key_budget(const ValidatedParams& p) {
  const std::uint64_t nm = static_cast<std::uint64_t>(p.n()) * p.num_messages();
  KeyBudget budget;
  budget.signer_link_bits = nm;
  budget.peer_link_bits = 2 * (nm / p.num_recipients()) * (1 + position_width(p.n()));
  return budget;
}

}  // namespace uss
