#include <gtest/gtest.h>

#include "support.hpp"
#include "uss/adversary.hpp"
#include "uss/analysis.hpp"
#include "uss/errors.hpp"

namespace uss {
namespace {

CoalitionView view_of(const ValidatedParams& p, const Distribution& d, std::set<ParticipantId> members,
                      PoolOptions opt = {}) {
  return pool_knowledge(p, d.signer, d.recipients, Coalition{std::move(members)}, opt);
}

TEST(PoolKnowledge, ViewContents) {
  const ValidatedParams p = test::make_params(4, 16, 2, "0.25", {"0.49", "0.45"});
  const Distribution d = test::honest_run(p);

  const CoalitionView none = view_of(p, d, {});
  ASSERT_EQ(none.messages.size(), 2u);
  EXPECT_TRUE(none.messages[0].sections.empty());
  EXPECT_TRUE(none.messages[0].received.empty());
  EXPECT_FALSE(none.messages[0].signature.has_value());

  const CoalitionView one = view_of(p, d, {1});
  const auto& mv = one.message(0);
  EXPECT_EQ(mv.sections.at(1), d.recipient(1).message(0).own_section);
  ASSERT_EQ(mv.received.size(), 4u);
  ASSERT_EQ(mv.created.size(), 4u);
  for (ParticipantId j = 1; j <= 4; ++j) {
    EXPECT_EQ(mv.received[j - 1].section, j);
    EXPECT_EQ(mv.received[j - 1].tester, 1u);
    EXPECT_EQ(mv.received[j - 1].fragment, d.recipient(1).message(0).row[j - 1]);
    EXPECT_EQ(mv.created[j - 1].section, 1u);
    EXPECT_EQ(mv.created[j - 1].tester, j);
    EXPECT_EQ(mv.created[j - 1].fragment, d.recipient(j).message(0).row[0]);
  }

  const CoalitionView signer = view_of(p, d, {0});
  EXPECT_EQ(*signer.message(1).signature, d.signer.signatures[1].bits);
  EXPECT_TRUE(signer.message(1).received.empty());
  EXPECT_TRUE(signer.message(1).created.empty());
}

TEST(PoolKnowledge, CapacityAndRoles) {
  const ValidatedParams p = test::reference_params(2);
  const Distribution d = test::honest_run(p);
  EXPECT_THROW(view_of(p, d, {7, 8}), CoalitionTooLarge);
  EXPECT_NO_THROW(view_of(p, d, {7, 8}, {.enforce_capacity = false}));
  EXPECT_THROW(view_of(p, d, {0, 8}, {.intent = Intent::kForge}), RoleError);
  EXPECT_THROW(view_of(p, d, {8}, {.intent = Intent::kSignerAttack}), RoleError);
  EXPECT_THROW(view_of(p, d, {9}), RoleError);
}

TEST(PoolKnowledge, NoHonestOnlyFragments) {
  const ValidatedParams p = test::reference_params(3);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {0, 5});
  for (const auto& mv : v.messages) {
    for (const auto& k : mv.received) EXPECT_TRUE(v.coalition.contains(k.tester));
    for (const auto& k : mv.created) EXPECT_TRUE(v.coalition.contains(k.section));
  }
}

TEST(Forge, UsesKnownBitsAndChecksRoles) {
  const ValidatedParams p = test::reference_params(4);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {8});
  RandomStream rng(4, Purpose::kAttack);
  const Signature s = forge_attempt(v, p, 0, 1, rng);
  const Signature& truth = d.signer.signatures[0];
  EXPECT_TRUE(std::equal(s.section(8, 64).begin(), s.section(8, 64).end(), truth.section(8, 64).begin()));
  for (ParticipantId j = 1; j <= 8; ++j) {
    EXPECT_EQ(fragment_mismatches(d.recipient(8).message(0).row[j - 1], s.section(j, 64)), 0u);
  }
  EXPECT_THROW(forge_attempt(v, p, 0, 8, rng), RoleError);
  EXPECT_THROW(forge_attempt(view_of(p, d, {0}), p, 0, 1, rng), RoleError);
}

TEST(Forge, TinyInstanceMatchesOracle) {
  // N=2, n=4, C={P_2}: the forger knows p_{1,2} but must guess the two bits
  // at p_{1,1}; both tests must pass, so success = 1/4.
  const ValidatedParams p = test::make_params(2, 4, 1, "0", {"0.495", "0.49"}, 6);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {2}, {.enforce_capacity = false});
  const ProtocolVerifier ver(p, d.recipients);
  RandomStream rng(6, Purpose::kAttack);
  constexpr std::uint64_t kTrials = 100000;
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < kTrials; ++t) {
    const Signature s = forge_attempt(v, p, 0, 1, rng);
    hits += attack_indicator(AttackKind::kForgery, v.coalition, ver, 0, s.bits, std::nullopt, ForgeTarget{1});
  }
  const Interval ci = clopper_pearson(hits, kTrials, 0.999);
  EXPECT_LE(ci.low, 0.25);
  EXPECT_GE(ci.high, 0.25);
}

TEST(Forge, DegenerateCoalitionAlwaysSucceeds) {
  const ValidatedParams p = test::make_params(4, 16, 1, "0", {"0.45", "0.35"}, 9);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {2, 3, 4}, {.enforce_capacity = false});
  const ProtocolVerifier ver(p, d.recipients);
  RandomStream rng(9, Purpose::kAttack);
  for (int t = 0; t < 200; ++t) {
    const Signature s = forge_attempt(v, p, 0, 1, rng);
    ASSERT_TRUE(ver.verify(1, 0, s.bits, 0));
  }
}

TEST(Forge, EmptyCoalitionSingleTestRate) {
  const ValidatedParams p = test::reference_params(10, 1);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {});
  RandomStream rng(10, Purpose::kAttack);
  std::uint64_t passes = 0, tests = 0;
  for (int t = 0; t < 5000; ++t) {
    const Signature s = forge_attempt(v, p, 0, 1, rng);
    for (auto h : section_mismatches(p, d.recipient(1), s)) {
      passes += test_passes(p, h, 0);
      ++tests;
    }
  }
  const Interval ci = clopper_pearson(passes, tests, 0.999);
  EXPECT_LE(ci.low, 37.0 / 256.0);
  EXPECT_GE(ci.high, 37.0 / 256.0);
}

// Bits at the target's honest test positions carry no information.
TEST(Forge, InformationBoundary) {
  const ValidatedParams p = test::reference_params(11, 1);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {8});
  RandomStream rng(11, Purpose::kAttack);
  const auto& row = d.recipient(1).message(0).row;
  const std::uint32_t probe_a = row[2].positions[0];      // section 3, honest
  const std::uint32_t probe_b = row[0].positions.back();  // section 1, the target's own
  const Signature& truth = d.signer.signatures[0];
  constexpr int kTrials = 100000;
  int agree_a = 0, agree_b = 0;
  for (int t = 0; t < kTrials; ++t) {
    const Signature s = forge_attempt(v, p, 0, 1, rng);
    agree_a += s.bits[2 * 64 + probe_a] == truth.bits[2 * 64 + probe_a];
    agree_b += s.bits[probe_b] == truth.bits[probe_b];
  }
  const double sd = std::sqrt(0.25 / kTrials);
  EXPECT_NEAR(static_cast<double>(agree_a) / kTrials, 0.5, 3 * sd);
  EXPECT_NEAR(static_cast<double>(agree_b) / kTrials, 0.5, 3 * sd);
}

TEST(Tamper, ZeroErrorRateOnlyHitsSpySections) {
  const ValidatedParams p = test::reference_params(12, 1);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {0, 8});
  RandomStream rng(12, Purpose::kAttack);
  const Signature s = tamper_attempt(v, p, 0, 0, -1, 1, 2, rng, Fraction(0));
  const Signature& truth = d.signer.signatures[0];
  for (ParticipantId j = 1; j <= 7; ++j) {
    EXPECT_TRUE(std::equal(s.section(j, 64).begin(), s.section(j, 64).end(), truth.section(j, 64).begin()));
  }
  EXPECT_EQ(hamming_distance(s.section(8, 64), truth.section(8, 64)), p.fragment_bits());
  EXPECT_EQ(passing_tests(p, d.recipient(1), s, 0), 8u);
  EXPECT_EQ(passing_tests(p, d.recipient(2), s, 0), 7u);
}

TEST(Tamper, FullErrorRateFailsEveryHonestTest) {
  const ValidatedParams p = test::reference_params(13, 1);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {0, 8});
  RandomStream rng(13, Purpose::kAttack);
  const Signature s = tamper_attempt(v, p, 0, 0, -1, 1, 2, rng, Fraction(1));
  for (ParticipantId i = 1; i <= 8; ++i) {
    const auto h = section_mismatches(p, d.recipient(i), s);
    for (ParticipantId j = 1; j <= 7; ++j) {
      for (Level l = -1; l <= p.l_max(); ++l) EXPECT_FALSE(test_passes(p, h[j - 1], l));
    }
  }
}

TEST(Tamper, RolesAndLevels) {
  const ValidatedParams p = test::reference_params(14, 1);
  const Distribution d = test::honest_run(p);
  RandomStream rng(14, Purpose::kAttack);
  const CoalitionView v = view_of(p, d, {0, 8});
  EXPECT_THROW(tamper_attempt(view_of(p, d, {8}), p, 0, 0, -1, 1, 2, rng), RoleError);
  EXPECT_THROW(tamper_attempt(v, p, 0, 0, 0, 1, 2, rng), LevelOrderError);
  EXPECT_THROW(tamper_attempt(v, p, 0, 1, 2, 1, 2, rng), LevelOrderError);
  EXPECT_THROW(tamper_attempt(v, p, 0, 0, -1, 8, 2, rng), RoleError);
  EXPECT_THROW(tamper_attempt(v, p, 0, 0, -1, 2, 2, rng), RoleError);
  EXPECT_EQ(optimal_error_rate(p, 0, -1), Fraction(2, 5));
}

// Honest-section flips do not depend on which recipients are targeted.
TEST(Tamper, TargetChoiceDoesNotChangeHonestFlips) {
  const ValidatedParams p = test::reference_params(15, 1);
  const Distribution d = test::honest_run(p);
  const CoalitionView v = view_of(p, d, {0, 8});
  RandomStream a(15, Purpose::kAttack), b(15, Purpose::kAttack);
  const Signature sa = tamper_attempt(v, p, 0, 0, -1, 1, 2, a);
  const Signature sb = tamper_attempt(v, p, 0, 0, -1, 5, 3, b);
  for (ParticipantId j = 1; j <= 7; ++j) {
    EXPECT_TRUE(std::equal(sa.section(j, 64).begin(), sa.section(j, 64).end(), sb.section(j, 64).begin()));
  }
}

TEST(Tamper, PerFragmentRatesMatchBinomialOracle) {
  const ValidatedParams p = test::make_params(8, 64, 1, "0.125", {"0.45", "0.30"}, 16);
  const double pass0 = test::binomial_mass(8, 0.375, [](std::uint32_t k) { return k * 10 < 24; });
  const double fail_m1 = test::binomial_mass(8, 0.375, [](std::uint32_t k) { return k * 10 >= 36; });
  std::uint64_t tests = 0, passed0 = 0, failed_m1 = 0;
  for (int run = 0; run < 200; ++run) {
    const ValidatedParams q = p.with_seed(1600 + run);
    const Distribution d = test::honest_run(q);
    const CoalitionView v = view_of(q, d, {0, 8});
    RandomStream rng(q.master_seed(), Purpose::kAttack);
    for (int t = 0; t < 10; ++t) {
      const Signature s = tamper_attempt(v, q, 0, 0, -1, 1, 2, rng, Fraction(3, 8));
      for (ParticipantId i = 1; i <= 7; ++i) {
        const auto h = section_mismatches(q, d.recipient(i), s);
        for (ParticipantId j = 1; j <= 7; ++j) {
          ++tests;
          passed0 += test_passes(q, h[j - 1], 0);
          failed_m1 += !test_passes(q, h[j - 1], -1);
        }
      }
    }
  }
  for (auto [count, expected] : {std::pair{passed0, pass0}, std::pair{failed_m1, fail_m1}}) {
    const Interval ci = clopper_pearson(count, tests, 0.999);
    EXPECT_LE(ci.low, expected);
    EXPECT_GE(ci.high, expected);
  }
}

}  // namespace
}  // namespace uss
