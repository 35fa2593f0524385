#include "uss/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "uss/adversary.hpp"
#include "uss/errors.hpp"
#include "uss/keystore.hpp"
#include "uss/protocol.hpp"

namespace uss {
namespace {

Rational to_rational(const Fraction& f) { return Rational(f.num(), f.den()); }

Rational binomial(std::uint32_t n, std::uint32_t k) {
  boost::multiprecision::cpp_int c = 1;
  for (std::uint32_t i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return Rational(c);
}

Rational power(const Rational& base, std::uint32_t e) {
  Rational r = 1;
  for (std::uint32_t i = 0; i < e; ++i) r *= base;
  return r;
}

BoundReport make_bound(double prefactor, double per_event) {
  BoundReport b;
  b.prefactor = prefactor;
  b.per_event = per_event;
  b.linearized = prefactor * per_event;
  b.union_form = per_event >= 1.0 ? 1.0 : -std::expm1(prefactor * std::log1p(-per_event));
  b.clamped = std::clamp(b.linearized, 0.0, 1.0);
  b.degenerate = per_event >= 1.0;
  return b;
}

BoundReport zero_bound() {
  BoundReport b;
  b.clamped = b.linearized = b.union_form = 0.0;
  return b;
}

double honest_count(const ValidatedParams& p) {
  return p.num_recipients() * (1.0 - p.dishonest_fraction().to_double());
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  return derive_key(seed, {static_cast<std::uint64_t>(Purpose::kTrial), index});
}

bool is_tamper(ScenarioKind k) {
  return k == ScenarioKind::kNonTrans || k == ScenarioKind::kRepudiate || k == ScenarioKind::kSpyDemo;
}

// P[|C| + Bin(N - |C|, q) > N f_0] with q the single-test pass probability.
Rational fixed_forge_exact(const ValidatedParams& p, std::uint32_t members) {
  const Rational q = exact_single_test(p.fragment_bits(), p.s(0), Fraction(1, 2));
  const Fraction f0 = fraction_threshold(p, 0);
  const std::uint32_t unknown = p.num_recipients() - members;
  Rational total = 0;
  for (std::uint32_t k = 0; k <= unknown; ++k) {
    const std::int64_t passes = members + k;
    if (passes * f0.den() <= static_cast<std::int64_t>(p.num_recipients()) * f0.num()) continue;
    total += binomial(unknown, k) * power(q, k) * power(1 - q, unknown - k);
  }
  return total;
}

std::uint32_t honest_disagreement(const ValidatedParams& p, std::span<const RecipientState> recipients,
                                  const Coalition& c, const Signature& sigma) {
  std::uint32_t lo = p.num_recipients();
  std::uint32_t hi = 0;
  for (ParticipantId i : c.honest_recipients(p.num_recipients())) {
    const std::uint32_t passing = passing_tests(p, recipients[i - 1], sigma, 0);
    lo = std::min(lo, passing);
    hi = std::max(hi, passing);
  }
  return hi >= lo ? hi - lo : 0;
}

}  // namespace

double hoeffding_single_test(std::uint32_t m, double s) {
  if (!(s > 0.0 && s < 0.5)) {
    throw ThresholdRangeError("s=" + std::to_string(s) + " must lie strictly between 0 and 1/2");
  }
  const double gap = 0.5 - s;
  return std::exp(-2.0 * gap * gap * static_cast<double>(m));
}

Rational exact_single_test(std::uint32_t m, const Fraction& s, const Fraction& bit_error) {
  const Rational e = to_rational(bit_error);
  Rational total = 0;
  for (std::uint32_t k = 0; k <= m; ++k) {
    // k < s m  <=>  k * den < num * m
    if (static_cast<__int128>(k) * s.den() >= static_cast<__int128>(s.num()) * m) break;
    total += binomial(m, k) * power(e, k) * power(1 - e, m - k);
  }
  return total;
}

double honest_pairs(const ValidatedParams& p) {
  const double h = honest_count(p);
  return h * (h - 1.0) / 2.0;
}

BoundReport forge_bound(const ValidatedParams& p, bool fixed_target) {
  const double p_t = hoeffding_single_test(p.fragment_bits(), p.s(0).to_double());
  const double h = honest_count(p);
  return make_bound(fixed_target ? h : h * h, p_t);
}

BoundReport nontrans_bound(const ValidatedParams& p, Level l, Level l_lower, bool fixed_pair) {
  if (!(l_lower < l) || l_lower < -1 || l > p.l_max()) {
    throw LevelOrderError("need -1 <= l' < l <= l_max, got l=" + std::to_string(l) +
                          " l'=" + std::to_string(l_lower));
  }
  const double gap = p.s(l_lower).to_double() - p.s(l).to_double();
  const double p_m = std::exp(-(gap * gap / 2.0) * p.fragment_bits());
  const double f_l = fraction_threshold(p, l).to_double();
  double prefactor = p.num_recipients() * (f_l - p.dishonest_fraction().to_double()) + 1.0;
  if (!fixed_pair) prefactor *= honest_pairs(p);
  return make_bound(prefactor, p_m);
}

BoundReport repudiation_bound(const ValidatedParams& p) {
  const double gap = p.s(-1).to_double() - p.s(0).to_double();
  const double p_m = std::exp(-(gap * gap / 2.0) * p.fragment_bits());
  return make_bound(honest_pairs(p) * (p.num_recipients() / 2.0 + 1.0), p_m);
}

Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) throw ScenarioError("confidence interval over zero trials");
  if (successes > trials) throw ScenarioError("more successes than trials");
  const double alpha = 1.0 - confidence;
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  Interval ci;
  ci.low = successes == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
  ci.high = successes == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
  return ci;
}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kForgeFixed: return "forge-fixed";
    case ScenarioKind::kForgeAny: return "forge-any";
    case ScenarioKind::kNonTrans: return "nontrans";
    case ScenarioKind::kRepudiate: return "repudiate";
    case ScenarioKind::kSpyDemo: return "spy-demo";
    case ScenarioKind::kHonest: return "honest";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  for (ScenarioKind k : {ScenarioKind::kForgeFixed, ScenarioKind::kForgeAny, ScenarioKind::kNonTrans,
                         ScenarioKind::kRepudiate, ScenarioKind::kSpyDemo, ScenarioKind::kHonest}) {
    if (name == to_string(k)) return k;
  }
  throw ScenarioError("unknown scenario '" + name + "'");
}

ResolvedScenario resolve_scenario(const ValidatedParams& p, const Scenario& s) {
  if (p.num_messages() == 0) throw ScenarioError("attacks need at least one message (M >= 1)");

  ResolvedScenario r;
  r.kind = s.kind;
  const std::uint32_t big_n = p.num_recipients();
  if (s.coalition) {
    for (ParticipantId c : *s.coalition) {
      if (c < 1 || c > big_n) throw RoleError("coalition member " + std::to_string(c) + " is not a recipient");
      r.coalition.members.insert(c);
    }
  } else if (s.kind != ScenarioKind::kHonest) {
    for (std::uint32_t k = 0; k < p.coalition_capacity(); ++k) r.coalition.members.insert(big_n - k);
  }
  if (is_tamper(s.kind)) r.coalition.members.insert(kSigner);

  const auto honest = r.coalition.honest_recipients(big_n);
  if (honest.empty()) throw ScenarioError("no honest recipient left");
  r.target = s.target.value_or(honest.front());

  switch (s.kind) {
    case ScenarioKind::kNonTrans:
      if (p.l_max() < 1) throw ScenarioError("nontrans needs l_max >= 1");
      r.level = s.level.value_or(1);
      r.level_lower = s.level_lower.value_or(r.level - 1);
      if (r.level < 1) throw LevelOutOfRange("nontrans level must be at least 1");
      break;
    case ScenarioKind::kRepudiate:
    case ScenarioKind::kSpyDemo:
      r.level = s.level.value_or(0);
      r.level_lower = s.level_lower.value_or(r.level - 1);
      break;
    default:
      break;
  }

  if (is_tamper(s.kind)) {
    if (honest.size() < 2) throw ScenarioError("tampering needs two honest recipients");
    r.target_pass = s.target_pass.value_or(honest[0]);
    r.target_fail = s.target_fail.value_or(r.target_pass == honest[1] ? honest[0] : honest[1]);
    if (s.kind == ScenarioKind::kSpyDemo) {
      r.error_rate = s.error_rate.value_or(Fraction(0));
    } else {
      r.error_rate = s.error_rate.value_or(optimal_error_rate(p, r.level, r.level_lower));
    }
    if (r.error_rate < Fraction(0) || r.error_rate > Fraction(1)) {
      throw ScenarioError("p_e must lie in [0, 1]");
    }
  }
  return r;
}

TrialOutcome run_trial(const ValidatedParams& p, const ResolvedScenario& s, std::uint64_t seed,
                       const Snapshot* pinned) {
  std::optional<Distribution> fresh;
  const SignerState* signer = nullptr;
  std::span<const RecipientState> recipients;
  const ValidatedParams trial_params = p.with_seed(seed);
  if (pinned) {
    signer = &pinned->signer;
    recipients = pinned->recipients;
  } else {
    KeyPool pool = provision_keys(trial_params, SeededRandom{seed});
    fresh = run_distribution(trial_params, pool);
    signer = &fresh->signer;
    recipients = fresh->recipients;
  }

  const ProtocolVerifier verifier(p, recipients);
  RandomStream stream(seed, Purpose::kAttack);
  const MessageId x = 0;
  TrialOutcome out;

  switch (s.kind) {
    case ScenarioKind::kHonest: {
      const Signature& sigma = signer->signatures.at(x);
      for (ParticipantId i = 1; i <= p.num_recipients() && !out.success; ++i) {
        for (Level l = -1; l <= p.l_max(); ++l) {
          if (!verifier.verify(i, x, sigma.bits, l)) {
            out.success = true;
            break;
          }
        }
      }
      break;
    }
    case ScenarioKind::kForgeFixed: {
      const CoalitionView view =
          pool_knowledge(p, *signer, recipients, s.coalition, {.intent = Intent::kForge});
      const Signature sigma = forge_attempt(view, p, x, s.target, stream);
      out.success = attack_indicator(AttackKind::kForgery, s.coalition, verifier, x, sigma.bits, std::nullopt,
                                     ForgeTarget{s.target}) == 1;
      break;
    }
    case ScenarioKind::kForgeAny: {
      const CoalitionView view =
          pool_knowledge(p, *signer, recipients, s.coalition, {.intent = Intent::kForge});
      for (ParticipantId t : s.coalition.honest_recipients(p.num_recipients())) {
        RandomStream candidate_stream = stream.split(t);
        const Signature sigma = forge_attempt(view, p, x, t, candidate_stream);
        if (attack_indicator(AttackKind::kForgery, s.coalition, verifier, x, sigma.bits) == 1) {
          out.success = true;
          break;
        }
      }
      break;
    }
    case ScenarioKind::kNonTrans:
    case ScenarioKind::kRepudiate:
    case ScenarioKind::kSpyDemo: {
      const CoalitionView view =
          pool_knowledge(p, *signer, recipients, s.coalition, {.intent = Intent::kSignerAttack});
      const Signature sigma = tamper_attempt(view, p, x, s.level, s.level_lower, s.target_pass, s.target_fail,
                                             stream, s.error_rate);
      out.disagreement = honest_disagreement(p, recipients, s.coalition, sigma);
      if (s.kind == ScenarioKind::kNonTrans) {
        out.success =
            attack_indicator(AttackKind::kNonTransferability, s.coalition, verifier, x, sigma.bits, s.level) == 1;
      } else if (s.kind == ScenarioKind::kRepudiate) {
        out.success = attack_indicator(AttackKind::kRepudiation, s.coalition, verifier, x, sigma.bits) == 1;
      } else {
        out.success = out.disagreement > s.coalition.recipient_members().size();
      }
      break;
    }
  }
  return out;
}

void finalize_estimate(AttackEstimate& e) {
  e.p_hat = e.trials == 0 ? 0.0 : static_cast<double>(e.successes) / static_cast<double>(e.trials);
  e.ci = clopper_pearson(e.successes, e.trials, e.confidence);
  e.bound_ok = e.ci.low <= e.bound.clamped;
}

AttackEstimate merge(const AttackEstimate& a, const AttackEstimate& b) {
  if (a.scenario != b.scenario) throw ScenarioError("cannot merge estimates of different scenarios");
  AttackEstimate m = a;
  m.successes += b.successes;
  m.trials += b.trials;
  m.max_disagreement = std::max(a.max_disagreement, b.max_disagreement);
  finalize_estimate(m);
  return m;
}

AttackEstimate monte_carlo(const ValidatedParams& p, const Scenario& scenario, std::uint64_t trials,
                           std::uint64_t seed, double confidence, unsigned workers) {
  if (trials == 0) throw ScenarioError("trials must be at least 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ScenarioError("confidence must lie in (0, 1)");
  if (scenario.pinned && !(scenario.pinned->params == p.raw())) {
    throw ScenarioError("pinned snapshot was made with different parameters");
  }
  const ResolvedScenario resolved = resolve_scenario(p, scenario);
  const Snapshot* pinned = scenario.pinned ? &*scenario.pinned : nullptr;

  // Fail fast on role and capacity errors before spawning workers.
  run_trial(p, resolved, trial_seed(seed, 0), pinned);

  AttackEstimate e;
  e.scenario = scenario.name.empty() ? to_string(scenario.kind) : scenario.name;
  e.trials = trials;
  e.confidence = confidence;

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(trials, 256))));
  std::vector<std::uint64_t> successes(workers, 0);
  std::vector<std::uint32_t> gaps(workers, 0);
  std::vector<std::exception_ptr> errors(workers);
  auto run_block = [&](unsigned w) {
    const std::uint64_t begin = trials * w / workers;
    const std::uint64_t end = trials * (w + 1) / workers;
    try {
      for (std::uint64_t t = begin; t < end; ++t) {
        const TrialOutcome o = run_trial(p, resolved, trial_seed(seed, t), pinned);
        successes[w] += o.success;
        gaps[w] = std::max(gaps[w], o.disagreement);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run_block(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  for (unsigned w = 0; w < workers; ++w) {
    e.successes += successes[w];
    e.max_disagreement = std::max(e.max_disagreement, gaps[w]);
  }

  switch (resolved.kind) {
    case ScenarioKind::kForgeFixed:
      e.bound = forge_bound(p, true);
      e.exact = fixed_forge_exact(p, static_cast<std::uint32_t>(resolved.coalition.recipient_members().size()));
      break;
    case ScenarioKind::kForgeAny:
      e.bound = forge_bound(p, false);
      break;
    case ScenarioKind::kNonTrans:
      e.bound = nontrans_bound(p, resolved.level, resolved.level_lower, false);
      break;
    case ScenarioKind::kRepudiate:
      e.bound = repudiation_bound(p);
      break;
    case ScenarioKind::kSpyDemo:
    case ScenarioKind::kHonest:
      e.bound = zero_bound();
      e.exact = Rational(0);
      break;
  }
  finalize_estimate(e);
  return e;
}

}  // namespace uss
