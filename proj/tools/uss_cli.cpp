// uss: command-line driver for distribution runs, verification, disputes,
// attack experiments and bound tables.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uss/adversary.hpp"
#include "uss/analysis.hpp"
#include "uss/config.hpp"
#include "uss/errors.hpp"
#include "uss/framework.hpp"
#include "uss/keystore.hpp"
#include "uss/protocol.hpp"
#include "uss/snapshot.hpp"

namespace {

using namespace uss;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitAbort = 3;
constexpr int kExitBound = 4;

struct BoundViolation {};

// Flags shared by every subcommand; each one overrides the config file.
struct CommonFlags {
  std::string config;
  std::optional<std::uint32_t> big_n, n, m;
  std::optional<std::string> d_f;
  std::optional<std::int32_t> l_max;
  std::vector<std::string> s;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> key_source, key_dir, out, format;
  unsigned workers = 1;
  bool timing = false;
};

RunConfig default_config() {
  RunConfig c;
  c.params.num_recipients = 8;
  c.params.n = 64;
  c.params.num_messages = 2;
  c.params.dishonest_fraction = Fraction(1, 8);
  c.params.l_max = 2;
  c.params.s_thresholds = {{-1, Fraction::parse("0.45")},
                           {0, Fraction::parse("0.35")},
                           {1, Fraction::parse("0.25")},
                           {2, Fraction::parse("0.15")}};
  c.params.master_seed = 1;
  c.key_source = SeededRandom{1};
  return c;
}

RunConfig build_config(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? default_config() : load_run_config(f.config);
  ProtocolParams& p = c.params;
  if (f.big_n) p.num_recipients = *f.big_n;
  if (f.n) p.n = *f.n;
  if (f.m) p.num_messages = *f.m;
  if (f.d_f) p.dishonest_fraction = Fraction::parse(*f.d_f);
  if (f.l_max) p.l_max = *f.l_max;
  if (!f.s.empty()) {
    p.s_thresholds.clear();
    Level l = -1;
    for (const auto& v : f.s) p.s_thresholds[l++] = Fraction::parse(v);
  }
  if (f.seed) {
    p.master_seed = *f.seed;
    if (std::holds_alternative<SeededRandom>(c.key_source)) c.key_source = SeededRandom{*f.seed};
  }
  if (f.key_source) {
    if (*f.key_source == "seeded") {
      c.key_source = SeededRandom{p.master_seed};
    } else if (*f.key_source == "file") {
      std::string dir = f.key_dir.value_or("");
      if (dir.empty()) {
        if (const auto* fi = std::get_if<FileIngest>(&c.key_source)) dir = fi->directory.string();
      }
      if (dir.empty()) {
        const char* env = std::getenv("USS_KEYDIR");
        if (env == nullptr) throw ConfigError("file key source needs --key-dir or $USS_KEYDIR");
        dir = env;
      }
      c.key_source = FileIngest{dir};
    } else {
      throw ConfigError("unknown key source '" + *f.key_source + "'");
    }
  } else if (f.key_dir) {
    c.key_source = FileIngest{*f.key_dir};
  }
  if (f.out) c.output_dir = *f.out;
  if (f.format) {
    if (*f.format != "table" && *f.format != "json") throw ConfigError("unknown format '" + *f.format + "'");
    c.formats = {*f.format};
  }
  return c;
}

bool json_output(const RunConfig& c) { return !c.formats.empty() && c.formats.front() == "json"; }

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void print_warnings(const ValidatedParams& p) {
  for (const auto& w : p.warnings()) std::cerr << "warning: " << w << "\n";
}

std::filesystem::path snapshot_path(const RunConfig& c, const std::string& override_path) {
  return override_path.empty() ? c.output_dir / "snapshot.uss" : std::filesystem::path(override_path);
}

Bits read_signature_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open signature file " + path.string());
  std::string text;
  in >> text;
  Bits bits;
  for (char ch : text) {
    if (ch != '0' && ch != '1') throw ConfigError("signature file must contain only 0 and 1");
    bits.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return bits;
}

void apply_tamper(Bits& bits, const std::vector<std::uint64_t>& flips) {
  for (std::uint64_t k : flips) {
    if (k >= bits.size()) {
      throw ConfigError("tamper index " + std::to_string(k) + " outside 0.." + std::to_string(bits.size() - 1));
    }
    bits[k] ^= 1u;
  }
}

// Signature under test: from a file when given, otherwise the signer's sigma^x.
Bits signature_under_test(const Snapshot& snap, MessageId x, const std::string& file) {
  if (x >= snap.signer.signatures.size()) {
    throw UnknownMessage("message " + std::to_string(x) + " is not in the message set");
  }
  if (file.empty()) return snap.signer.signatures[x].bits;
  Bits bits = read_signature_file(file);
  const std::size_t expected = snap.signer.signatures[x].bits.size();
  if (bits.size() != expected) {
    throw ConfigError("signature has " + std::to_string(bits.size()) + " bits, expected " + std::to_string(expected));
  }
  return bits;
}

int cmd_distribute(const RunConfig& c, const std::string& export_dir, std::optional<std::uint64_t> tamper_envelope) {
  const ValidatedParams p = validate_params(c.params);
  print_warnings(p);
  KeyPool pool = provision_keys(p, c.key_source);
  if (!export_dir.empty()) export_keys(pool, export_dir);
  ChannelTap tap;
  if (tamper_envelope) {
    // Flip one bit of the k-th envelope in flight.
    tap = [k = *tamper_envelope, seen = std::uint64_t{0}](AuthenticatedEnvelope& e) mutable {
      if (seen++ != k) return;
      if (e.ciphertext.empty()) {
        e.tag ^= 1u;
      } else {
        e.ciphertext[0] ^= 1u;
      }
    };
  }
  Distribution d = run_distribution(p, pool, tap);

  std::filesystem::create_directories(c.output_dir);
  save_snapshot(c.output_dir / "snapshot.uss", Snapshot{p.raw(), d.signer, d.recipients});
  {
    std::ofstream t(c.output_dir / "transcript.jsonl");
    d.transcript.write_jsonl(t);
  }

  const KeyBudget budget = key_budget(p);
  Json links = Json::array();
  for (const auto& [a, b] : pool.pairs()) {
    const LinkUsage u = pool.usage(a, b);
    links.push_back({{"a", a},
                     {"b", b},
                     {"capacity", u.capacity},
                     {"payload_bits", u.payload_bits},
                     {"tag_key_bits", u.tag_key_bits},
                     {"envelopes", u.envelopes},
                     {"expected_payload_bits", a == kSigner ? budget.signer_link_bits : budget.peer_link_bits}});
  }
  Json report{{"params", params_to_json(p.raw())},
              {"budget", {{"signer_link_bits", budget.signer_link_bits}, {"peer_link_bits", budget.peer_link_bits}}},
              {"links", links}};
  {
    std::ofstream k(c.output_dir / "keys.json");
    k << report.dump(2) << "\n";
  }

  if (json_output(c)) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << "distributed M=" << p.num_messages() << " messages to N=" << p.num_recipients()
              << " recipients; snapshot at " << (c.output_dir / "snapshot.uss").string() << "\n";
    std::cout << "payload bits per signer link: " << budget.signer_link_bits
              << ", per recipient pair: " << budget.peer_link_bits << "\n";
  }
  return kExitOk;
}

int cmd_sign(const RunConfig& c, const std::string& snap_file, MessageId x) {
  const auto path = snapshot_path(c, snap_file);
  Snapshot snap = load_snapshot(path);
  validate_params(snap.params);
  const Signature sigma = sign(snap.signer, x);
  save_snapshot(path, snap);

  const std::string bits = bits_to_string(sigma.bits);
  const auto sig_path = path.parent_path() / ("signature_" + std::to_string(x) + ".txt");
  std::ofstream(sig_path) << bits << "\n";
  if (json_output(c)) {
    std::cout << Json{{"message", x}, {"signature", bits}, {"file", sig_path.string()}}.dump() << "\n";
  } else {
    std::cout << "message " << x << " signed (" << sigma.bits.size() << " bits), written to " << sig_path.string()
              << "\n"
              << bits << "\n";
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& c, const std::string& snap_file, MessageId x, Level level,
               const std::string& sig_file, const std::vector<std::uint64_t>& tamper) {
  const Snapshot snap = load_snapshot(snapshot_path(c, snap_file));
  const ValidatedParams p = validate_params(snap.params);
  p.s(level);  // range check before any state is read
  Bits bits = signature_under_test(snap, x, sig_file);
  apply_tamper(bits, tamper);

  Json rows = Json::array();
  for (const RecipientState& r : snap.recipients) {
    const auto mismatches = section_mismatches(p, r, x, bits);
    std::uint32_t passing = 0;
    for (auto h : mismatches) passing += test_passes(p, h, level);
    rows.push_back({{"recipient", r.id},
                    {"passing", passing},
                    {"mismatches", mismatches},
                    {"verified", accepts(p, mismatches, level)}});
  }
  if (json_output(c)) {
    std::cout << Json{{"message", x}, {"level", level}, {"tampered_bits", tamper.size()}, {"recipients", rows}}.dump(2)
              << "\n";
    return kExitOk;
  }
  std::cout << "message " << x << " level " << level << " (pass needs > " << fraction_threshold(p, level).to_string()
            << " * " << p.num_recipients() << " tests)\n";
  std::cout << "recipient  passing  verified\n";
  for (const auto& row : rows) {
    char line[80];
    std::snprintf(line, sizeof line, "%9u  %7u  %s\n", row["recipient"].get<unsigned>(),
                  row["passing"].get<unsigned>(), row["verified"].get<bool>() ? "True" : "False");
    std::cout << line;
  }
  return kExitOk;
}

int cmd_dispute(const RunConfig& c, const std::string& snap_file, MessageId x, std::optional<Level> transfer,
                const std::string& sig_file, const std::vector<std::uint64_t>& tamper) {
  const Snapshot snap = load_snapshot(snapshot_path(c, snap_file));
  const ValidatedParams p = validate_params(snap.params);
  Bits bits = signature_under_test(snap, x, sig_file);
  apply_tamper(bits, tamper);
  const ProtocolVerifier v(p, snap.recipients);
  const DisputeVerdict d = transfer ? mv_transfer_dispute(v, x, bits, *transfer) : mv_dispute(v, x, bits);
  const SignatureClassification cls = classify_signature(v, x, bits, BitSpan(snap.signer.signatures[x].bits));
  if (json_output(c)) {
    std::cout << Json{{"message", x},
                      {"verdict", to_string(d.verdict)},
                      {"accepting", d.accepting},
                      {"classification", to_json(cls)}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "verdict: " << to_string(d.verdict) << " (" << d.accepting.size() << " of " << p.num_recipients()
              << " recipients accept)\n";
    std::cout << "authentic: " << (cls.authentic ? "yes" : "no") << ", valid: " << (cls.valid ? "yes" : "no") << "\n";
  }
  return kExitOk;
}

struct AttackFlags {
  std::string scenario;
  std::optional<std::uint64_t> trials, seed;
  double confidence = 0.99;
  std::vector<ParticipantId> coalition;
  std::optional<ParticipantId> target, target_pass, target_fail;
  std::optional<Level> level, level_lower;
  std::optional<std::string> p_e;
};

Scenario build_scenario(const RunConfig& c, const AttackFlags& f) {
  Scenario s;
  bool declared = false;
  for (const Scenario& d : c.scenarios) {
    if (d.name == f.scenario) {
      s = d;
      declared = true;
    }
  }
  if (!declared) {
    s.kind = parse_scenario_kind(f.scenario);
    s.name = f.scenario;
  }
  if (!f.coalition.empty()) s.coalition = f.coalition;
  if (f.target) s.target = f.target;
  if (f.target_pass) s.target_pass = f.target_pass;
  if (f.target_fail) s.target_fail = f.target_fail;
  if (f.level) s.level = f.level;
  if (f.level_lower) s.level_lower = f.level_lower;
  if (f.p_e) s.error_rate = Fraction::parse(*f.p_e);
  if (f.trials) s.trials = *f.trials;
  if (f.seed) s.seed = *f.seed;
  return s;
}

std::string table_header(bool timing) {
  std::string h = "scenario        N     n   trials  succ   p_hat       ci_low      ci_high     exact       bound_lin   "
                  "bound_union bound_clamp ok";
  if (timing) h += "  runtime_s";
  return h + "\n";
}

std::string table_row(const ValidatedParams& p, const AttackEstimate& e, std::optional<double> runtime) {
  char buf[320];
  const std::string exact = e.exact ? fmt("%.6g", e.exact->convert_to<double>()) : "-";
  std::snprintf(buf, sizeof buf, "%-14s %3u %5u %8llu %5llu  %-11.6g %-11.6g %-11.6g %-11s %-11.6g %-11.6g %-11.6g %s",
                e.scenario.c_str(), p.num_recipients(), p.n(), static_cast<unsigned long long>(e.trials),
                static_cast<unsigned long long>(e.successes), e.p_hat, e.ci.low, e.ci.high, exact.c_str(),
                e.bound.linearized, e.bound.union_form, e.bound.clamped, e.bound_ok ? "yes" : "NO");
  std::string row = buf;
  if (runtime) row += fmt("  %.3f", *runtime);
  return row + "\n";
}

Json estimate_record(const ValidatedParams& p, const AttackEstimate& e, std::optional<double> runtime) {
  Json j = to_json(e);
  j["params"] = params_to_json(p.raw());
  if (runtime) j["runtime_s"] = *runtime;
  return j;
}

int run_estimates(const RunConfig& c, const CommonFlags& common, const AttackFlags& af,
                  const std::vector<std::uint32_t>& n_values) {
  std::vector<ProtocolParams> sets;
  if (n_values.empty()) {
    sets.push_back(c.params);
  } else {
    for (std::uint32_t n : n_values) {
      ProtocolParams q = c.params;
      q.n = n;
      sets.push_back(q);
    }
  }
  // Validate everything up front so no trials run on a bad sweep.
  std::vector<ValidatedParams> validated;
  for (const auto& q : sets) validated.push_back(validate_params(q));
  const Scenario scenario = build_scenario(c, af);

  bool ok = true;
  Json records = Json::array();
  if (!json_output(c)) std::cout << table_header(common.timing);
  for (const auto& p : validated) {
    print_warnings(p);
    const auto start = std::chrono::steady_clock::now();
    const AttackEstimate e = monte_carlo(p, scenario, scenario.trials, scenario.seed, af.confidence, common.workers);
    std::optional<double> runtime;
    if (common.timing) {
      runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    ok = ok && e.bound_ok;
    if (json_output(c)) {
      records.push_back(estimate_record(p, e, runtime));
    } else {
      std::cout << table_row(p, e, runtime);
    }
  }
  if (json_output(c)) std::cout << (n_values.empty() ? records.front() : records).dump(2) << "\n";
  if (!ok) {
    std::cerr << "bound violation: empirical lower confidence limit exceeds the analytic bound\n";
    throw BoundViolation{};
  }
  return kExitOk;
}

int cmd_bounds(const RunConfig& c) {
  const ValidatedParams p = validate_params(c.params);
  print_warnings(p);
  const double p_t = hoeffding_single_test(p.fragment_bits(), p.s(0).to_double());
  const Rational exact = exact_single_test(p.fragment_bits(), p.s(0), Fraction(1, 2));
  struct Row {
    std::string name;
    BoundReport b;
  };
  std::vector<Row> rows{{"forge-fixed", forge_bound(p, true)},
                        {"forge-any", forge_bound(p, false)},
                        {"repudiate", repudiation_bound(p)}};
  for (Level l = 0; l <= p.l_max(); ++l) {
    rows.push_back({"nontrans " + std::to_string(l) + "/" + std::to_string(l - 1), nontrans_bound(p, l, l - 1, false)});
  }
  const KeyBudget kb = key_budget(p);

  if (json_output(c)) {
    Json j{{"params", params_to_json(p.raw())},
           {"single_test", {{"hoeffding", p_t}, {"exact", rational_to_string(exact)}, {"exact_approx", exact.convert_to<double>()}}},
           {"key_budget", {{"signer_link_bits", kb.signer_link_bits}, {"peer_link_bits", kb.peer_link_bits}}}};
    Json b = Json::object();
    for (const auto& r : rows) b[r.name] = to_json(r.b);
    j["bounds"] = b;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  std::cout << "m = " << p.fragment_bits() << ", s_0 = " << p.s(0).to_string() << "\n";
  std::cout << "single test: hoeffding " << fmt("%.6g", p_t) << ", exact " << rational_to_string(exact) << " ("
            << fmt("%.6g", exact.convert_to<double>()) << ")\n";
  std::cout << "key budget: signer link " << kb.signer_link_bits << " bits, recipient pair " << kb.peer_link_bits
            << " bits\n";
  std::cout << "bound          prefactor   per_event   linearized  union       clamped\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %-11.6g %-11.6g %-11.6g %-11.6g %-11.6g%s\n", r.name.c_str(),
                  r.b.prefactor, r.b.per_event, r.b.linearized, r.b.union_form, r.b.clamped,
                  r.b.degenerate ? " degenerate" : "");
    std::cout << line;
  }
  return kExitOk;
}

void add_common(CLI::App& app, CommonFlags& f) {
  app.add_option("--config", f.config, "JSON run configuration");
  app.add_option("--N", f.big_n, "number of recipients");
  app.add_option("--n", f.n, "bits per section");
  app.add_option("--M", f.m, "number of messages");
  app.add_option("--d-f", f.d_f, "dishonest fraction, e.g. 1/8");
  app.add_option("--l-max", f.l_max, "highest verification level");
  app.add_option("--s", f.s, "thresholds s_-1,s_0,...,s_lmax")->delimiter(',');
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--key-source", f.key_source, "seeded or file");
  app.add_option("--key-dir", f.key_dir, "directory of .ussk key files");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--format", f.format, "table or json");
  app.add_option("--workers", f.workers, "worker threads for trials")->check(CLI::PositiveNumber);
  app.add_flag("--timing", f.timing, "add a runtime column");
}

void add_attack_flags(CLI::App& cmd, AttackFlags& f) {
  cmd.add_option("--scenario", f.scenario, "declared scenario or kind")->required();
  cmd.add_option("--trials", f.trials);
  cmd.add_option("--attack-seed", f.seed);
  cmd.add_option("--confidence", f.confidence);
  cmd.add_option("--coalition", f.coalition, "recipient ids")->delimiter(',');
  cmd.add_option("--target", f.target);
  cmd.add_option("--target-pass", f.target_pass);
  cmd.add_option("--target-fail", f.target_fail);
  cmd.add_option("--level", f.level);
  cmd.add_option("--level-lower", f.level_lower);
  cmd.add_option("--p-e", f.p_e, "bit-flip probability override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unconditionally secure signature simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  CommonFlags common;
  add_common(app, common);

  auto* distribute = app.add_subcommand("distribute", "run the distribution stage");
  std::string export_dir;
  distribute->add_option("--export-keys", export_dir, "also write the provisioned key files here");
  std::optional<std::uint64_t> tamper_envelope;
  distribute->add_option("--tamper-envelope", tamper_envelope, "flip a bit of the k-th envelope in transit");

  std::string snap_file, sig_file;
  MessageId message = 0;
  Level level = 0;
  std::vector<std::uint64_t> tamper;
  std::optional<Level> transfer_level;

  auto* sign_cmd = app.add_subcommand("sign", "release sigma^x and mark x used");
  sign_cmd->add_option("--snapshot", snap_file);
  sign_cmd->add_option("--message", message)->required();

  auto* verify_cmd = app.add_subcommand("verify", "per-recipient verification at one level");
  verify_cmd->add_option("--snapshot", snap_file);
  verify_cmd->add_option("--message", message)->required();
  verify_cmd->add_option("--level", level)->required();
  verify_cmd->add_option("--signature", sig_file, "file of 0/1 characters");
  verify_cmd->add_option("--tamper", tamper, "bit indices to flip")->delimiter(',');

  auto* dispute_cmd = app.add_subcommand("dispute", "majority-vote dispute resolution");
  dispute_cmd->add_option("--snapshot", snap_file);
  dispute_cmd->add_option("--message", message)->required();
  dispute_cmd->add_option("--transfer-level", transfer_level);
  dispute_cmd->add_option("--signature", sig_file);
  dispute_cmd->add_option("--tamper", tamper)->delimiter(',');

  AttackFlags attack_flags;
  auto* attack_cmd = app.add_subcommand("attack", "Monte Carlo attack estimate");
  add_attack_flags(*attack_cmd, attack_flags);

  auto* bounds_cmd = app.add_subcommand("bounds", "closed-form bound table");

  AttackFlags sweep_flags;
  std::vector<std::uint32_t> n_values{16, 32, 64, 128};
  auto* sweep_cmd = app.add_subcommand("sweep", "attack estimate for each n");
  add_attack_flags(*sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--n-values", n_values)->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const RunConfig config = build_config(common);
    if (*distribute) return cmd_distribute(config, export_dir, tamper_envelope);
    if (*sign_cmd) return cmd_sign(config, snap_file, message);
    if (*verify_cmd) return cmd_verify(config, snap_file, message, level, sig_file, tamper);
    if (*dispute_cmd) return cmd_dispute(config, snap_file, message, transfer_level, sig_file, tamper);
    if (*attack_cmd) return run_estimates(config, common, attack_flags, {});
    if (*bounds_cmd) return cmd_bounds(config);
    if (*sweep_cmd) return run_estimates(config, common, sweep_flags, n_values);
  } catch (const BoundViolation&) {
    return kExitBound;
  } catch (const AuthFailure& e) {
    std::cerr << "abort: " << e.what() << "\n";
    return kExitAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
