#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "uss/fraction.hpp"
#include "uss/keystore.hpp"
#include "uss/params.hpp"
#include "uss/protocol.hpp"
#include "uss/rng.hpp"

namespace uss::test {

/// Params from decimal strings; s lists thresholds from level -1 upward.
inline ProtocolParams make_raw(std::uint32_t big_n, std::uint32_t n, std::uint32_t m, const std::string& d_f,
                               std::initializer_list<const char*> s, std::uint64_t seed = 1) {
  ProtocolParams p;
  p.num_recipients = big_n;
  p.n = n;
  p.num_messages = m;
  p.dishonest_fraction = Fraction::parse(d_f);
  p.l_max = static_cast<std::int32_t>(s.size()) - 2;
  Level l = -1;
  for (const char* v : s) p.s_thresholds[l++] = Fraction::parse(v);
  p.master_seed = seed;
  return p;
}

inline ValidatedParams make_params(std::uint32_t big_n, std::uint32_t n, std::uint32_t m, const std::string& d_f,
                                   std::initializer_list<const char*> s, std::uint64_t seed = 1) {
  return validate_params(make_raw(big_n, n, m, d_f, s, seed));
}

/// The N=8, n=64 instance used throughout the examples.
inline ValidatedParams reference_params(std::uint64_t seed = 1, std::uint32_t m = 2) {
  return make_params(8, 64, m, "0.125", {"0.45", "0.35", "0.25", "0.15"}, seed);
}

inline Distribution honest_run(const ValidatedParams& p) {
  KeyPool pool = provision_keys(p, SeededRandom{p.master_seed()});
  return run_distribution(p, pool);
}

inline Bits random_bits(RandomStream& rng, std::size_t count) {
  Bits b(count);
  for (auto& v : b) v = rng.bit();
  return b;
}

using BigRational = boost::multiprecision::cpp_rational;

/// Brute force: count of m-bit error patterns with weight below s*m, over 2^m.
inline BigRational enumerate_single_test(std::uint32_t m, const Fraction& s) {
  std::uint64_t passing = 0;
  for (std::uint64_t pattern = 0; pattern < (1ull << m); ++pattern) {
    const auto h = static_cast<std::int64_t>(__builtin_popcountll(pattern));
    if (h * s.den() < s.num() * static_cast<std::int64_t>(m)) ++passing;
  }
  return BigRational(passing, boost::multiprecision::cpp_int(1) << m);
}

/// sum_{k : pred(k)} C(m,k) e^k (1-e)^(m-k), evaluated term by term in doubles.
template <typename Pred>
double binomial_mass(std::uint32_t m, double e, Pred pred) {
  double total = 0.0;
  for (std::uint32_t k = 0; k <= m; ++k) {
    if (!pred(k)) continue;
    double c = 1.0;
    for (std::uint32_t i = 1; i <= k; ++i) c = c * (m - k + i) / i;
    total += c * std::pow(e, k) * std::pow(1.0 - e, m - k);
  }
  return total;
}

/// Exact repudiation probability of the spy + p_e attack with (l, l') = (0, -1).
///
/// Every fragment test of every recipient looks at disjoint positions, so
/// with i.i.d. flips the per-recipient pass counts are independent. Members'
/// sections pass for everyone except target_fail, who fails all of them.
/// Members vote in the dispute but cannot be the deceived party.
inline double repudiation_oracle(std::uint32_t big_n, std::uint32_t m, const Fraction& s0, const Fraction& s_minus1,
                                 const Fraction& d_f, std::uint32_t members, double p_e) {
  const auto passes = [&](const Fraction& s) {
    return binomial_mass(m, p_e, [&](std::uint32_t k) {
      return static_cast<std::int64_t>(k) * s.den() < s.num() * static_cast<std::int64_t>(m);
    });
  };
  const double both = passes(s0);
  const double only_minus1 = passes(s_minus1) - both;
  const double fail = 1.0 - both - only_minus1;
  const std::uint32_t tests = big_n - members;
  const Fraction f0 = Fraction(1, 2) + d_f;

  // joint[k0][k1]: k0 tests pass at both levels, k1 only at -1
  std::vector<std::vector<double>> joint(tests + 1, std::vector<double>(tests + 1, 0.0));
  joint[0][0] = 1.0;
  for (std::uint32_t t = 0; t < tests; ++t) {
    std::vector<std::vector<double>> next(tests + 1, std::vector<double>(tests + 1, 0.0));
    for (std::uint32_t a = 0; a <= t; ++a) {
      for (std::uint32_t b = 0; a + b <= t; ++b) {
        const double w = joint[a][b];
        if (w == 0.0) continue;
        next[a + 1][b] += w * both;
        next[a][b + 1] += w * only_minus1;
        next[a][b] += w * fail;
      }
    }
    joint = std::move(next);
  }
  struct Vote {
    double accept0_and_minus1 = 0, minus1_only = 0, neither = 0;
  };
  const auto vote = [&](std::uint32_t fixed) {
    Vote v;
    for (std::uint32_t a = 0; a <= tests; ++a) {
      for (std::uint32_t b = 0; a + b <= tests; ++b) {
        const std::int64_t c0 = fixed + a;
        const std::int64_t c1 = fixed + a + b;
        const bool acc0 = c0 * f0.den() > static_cast<std::int64_t>(big_n) * f0.num();
        const bool acc1 = 2 * c1 > static_cast<std::int64_t>(big_n);
        if (acc0) {
          v.accept0_and_minus1 += joint[a][b];
        } else if (acc1) {
          v.minus1_only += joint[a][b];
        } else {
          v.neither += joint[a][b];
        }
      }
    }
    return v;
  };
  const Vote honest = vote(members);
  const Vote spied = vote(0);
  const std::uint32_t honest_count = big_n - members;

  // state[deceived][votes at -1]
  std::vector<std::vector<double>> state(2, std::vector<double>(big_n + 1, 0.0));
  state[0][0] = 1.0;
  auto add = [&](const Vote& v, bool can_deceive) {
    std::vector<std::vector<double>> next(2, std::vector<double>(big_n + 1, 0.0));
    for (int dec = 0; dec < 2; ++dec) {
      for (std::uint32_t c = 0; c < big_n; ++c) {
        const double w = state[dec][c];
        if (w == 0.0) continue;
        next[can_deceive ? 1 : dec][c + 1] += w * v.accept0_and_minus1;
        next[dec][c + 1] += w * v.minus1_only;
        next[dec][c] += w * v.neither;
      }
    }
    state = std::move(next);
  };
  for (std::uint32_t i = 0; i + 1 < honest_count; ++i) add(honest, true);
  add(spied, true);
  for (std::uint32_t i = 0; i < members; ++i) add(honest, false);

  double total = 0.0;
  for (std::uint32_t c = 0; 2 * c <= big_n; ++c) total += state[1][c];
  return total;
}

}  // namespace uss::test
