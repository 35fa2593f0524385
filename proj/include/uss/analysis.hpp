#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "uss/fraction.hpp"
#include "uss/framework.hpp"
#include "uss/params.hpp"
#include "uss/snapshot.hpp"

namespace uss {

using Rational = boost::multiprecision::cpp_rational;

/// exp(-2 (1/2 - s)^2 m). Throws ThresholdRangeError unless 0 < s < 1/2.
double hoeffding_single_test(std::uint32_t m, double s);

/// P[Binomial(m, bit_error) < s m], exact.
Rational exact_single_test(std::uint32_t m, const Fraction& s, const Fraction& bit_error);

/// Closed-form bound in three forms: prefactor * p, 1 - (1 - p)^prefactor,
/// and the first clamped to [0, 1].
struct BoundReport {
  double prefactor = 0.0;
  double per_event = 0.0;  // p_t or p_m
  double linearized = 0.0;
  double union_form = 0.0;
  double clamped = 0.0;
  bool degenerate = false;  // zero exponent: no decay in n
};

BoundReport forge_bound(const ValidatedParams& p, bool fixed_target);

/// Throws LevelOrderError unless -1 <= l_lower < l <= l_max.
BoundReport nontrans_bound(const ValidatedParams& p, Level l, Level l_lower, bool fixed_pair);

BoundReport repudiation_bound(const ValidatedParams& p);

/// Honest pairs: N(1-d_f) (N(1-d_f) - 1) / 2.
double honest_pairs(const ValidatedParams& p);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Exact binomial interval for k successes in n trials.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence);

enum class ScenarioKind { kForgeFixed, kForgeAny, kNonTrans, kRepudiate, kSpyDemo, kHonest };

const char* to_string(ScenarioKind kind);
/// Throws ScenarioError for unknown names.
ScenarioKind parse_scenario_kind(const std::string& name);

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::kHonest;
  std::optional<std::vector<ParticipantId>> coalition;  // recipients only; defaults by kind
  std::optional<ParticipantId> target;                  // forge-fixed
  std::optional<ParticipantId> target_pass;             // tamper scenarios
  std::optional<ParticipantId> target_fail;
  std::optional<Level> level;                           // nontrans l
  std::optional<Level> level_lower;                     // nontrans l'
  std::optional<Fraction> error_rate;                   // p_e override
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
  std::optional<Snapshot> pinned;  // reuse one distribution for every trial
};

/// Concrete attack setup after defaults are filled in and roles checked.
struct ResolvedScenario {
  ScenarioKind kind = ScenarioKind::kHonest;
  Coalition coalition;
  ParticipantId target = 0;
  ParticipantId target_pass = 0;
  ParticipantId target_fail = 0;
  Level level = 0;
  Level level_lower = -1;
  Fraction error_rate;
};

ResolvedScenario resolve_scenario(const ValidatedParams& p, const Scenario& s);

struct AttackEstimate {
  std::string scenario;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  double p_hat = 0.0;
  double confidence = 0.99;
  Interval ci;
  BoundReport bound;
  std::optional<Rational> exact;
  std::uint32_t max_disagreement = 0;  // largest honest passing-count gap seen
  bool bound_ok = true;                // ci.low <= bound.clamped
};

/// Recomputes p_hat, ci and bound_ok from the counts.
void finalize_estimate(AttackEstimate& e);

/// Pools the counts of two runs of the same scenario.
AttackEstimate merge(const AttackEstimate& a, const AttackEstimate& b);

/// Runs trials with sub-streams derived from (seed, trial index). Results do
/// not depend on `workers`. Throws ScenarioError on trials == 0.
AttackEstimate monte_carlo(const ValidatedParams& p, const Scenario& scenario, std::uint64_t trials,
                           std::uint64_t seed, double confidence, unsigned workers = 1);

/// Success indicator of one trial; exposed for tests.
struct TrialOutcome {
  bool success = false;
  std::uint32_t disagreement = 0;
};
TrialOutcome run_trial(const ValidatedParams& p, const ResolvedScenario& s, std::uint64_t trial_seed,
                       const Snapshot* pinned);

}  // namespace uss
