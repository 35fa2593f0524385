#include "uss/config.hpp"

#include <cstdlib>
#include <fstream>

#include "uss/errors.hpp"

namespace uss {
namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

Json optional_level(const std::optional<Level>& l) { return l ? Json(*l) : Json(nullptr); }

}  // namespace

const Scenario& RunConfig::scenario(const std::string& name) const {
  for (const Scenario& s : scenarios) {
    if (s.name == name) return s;
  }
  throw ScenarioError("scenario '" + name + "' is not declared in the config");
}

Fraction fraction_from_json(const Json& j) {
  if (j.is_string()) return Fraction::parse(j.get<std::string>());
  if (j.is_number_integer()) return Fraction(j.get<std::int64_t>());
  // dump() prints the shortest text that round-trips, e.g. 0.45 -> "0.45".
  if (j.is_number_float()) return Fraction::parse(j.dump());
  throw ConfigError("expected a fraction, got " + j.dump());
}

ProtocolParams params_from_json(const Json& j) {
  ProtocolParams p;
  p.num_recipients = j.at("N").get<std::uint32_t>();
  p.n = j.at("n").get<std::uint32_t>();
  p.num_messages = get_or<std::uint32_t>(j, "M", 1);
  p.dishonest_fraction = fraction_from_json(j.at("d_f"));
  p.l_max = j.at("l_max").get<std::int32_t>();
  p.master_seed = get_or<std::uint64_t>(j, "seed", 0);

  const Json& s = j.at("s");
  if (s.is_array()) {
    Level l = -1;
    for (const Json& v : s) p.s_thresholds[l++] = fraction_from_json(v);
  } else if (s.is_object()) {
    for (const auto& [key, v] : s.items()) {
      std::size_t used = 0;
      const int level = std::stoi(key, &used);
      if (used != key.size()) throw ConfigError("bad level key '" + key + "'");
      p.s_thresholds[level] = fraction_from_json(v);
    }
  } else {
    throw ConfigError("'s' must be an array (from level -1) or an object keyed by level");
  }
  return p;
}

Json params_to_json(const ProtocolParams& p) {
  Json s = Json::object();
  for (const auto& [l, f] : p.s_thresholds) s[std::to_string(l)] = f.to_string();
  return Json{{"N", p.num_recipients}, {"n", p.n},         {"M", p.num_messages},
              {"d_f", p.dishonest_fraction.to_string()}, {"l_max", p.l_max}, {"s", s},
              {"seed", p.master_seed}};
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.kind = parse_scenario_kind(j.at("kind").get<std::string>());
  s.name = get_or<std::string>(j, "name", to_string(s.kind));
  s.coalition = get_opt<std::vector<ParticipantId>>(j, "coalition");
  s.target = get_opt<ParticipantId>(j, "target");
  s.target_pass = get_opt<ParticipantId>(j, "target_pass");
  s.target_fail = get_opt<ParticipantId>(j, "target_fail");
  s.level = get_opt<Level>(j, "level");
  s.level_lower = get_opt<Level>(j, "level_lower");
  if (j.contains("p_e") && !j.at("p_e").is_null()) s.error_rate = fraction_from_json(j.at("p_e"));
  s.trials = get_or<std::uint64_t>(j, "trials", s.trials);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
  return s;
}

RunConfig run_config_from_json(const Json& j) {
  try {
    RunConfig c;
    c.params = params_from_json(j.at("params"));
    c.key_source = SeededRandom{c.params.master_seed};
    if (j.contains("key_source")) {
      const Json& ks = j.at("key_source");
      const auto kind = get_or<std::string>(ks, "kind", "seeded");
      if (kind == "seeded") {
        c.key_source = SeededRandom{get_or<std::uint64_t>(ks, "seed", c.params.master_seed)};
      } else if (kind == "file") {
        std::string dir = get_or<std::string>(ks, "directory", "");
        if (dir.empty()) {
          const char* env = std::getenv("USS_KEYDIR");
          if (env == nullptr) throw ConfigError("file key source needs a directory or $USS_KEYDIR");
          dir = env;
        }
        c.key_source = FileIngest{dir};
      } else {
        throw ConfigError("unknown key source kind '" + kind + "'");
      }
    }
    if (j.contains("scenarios")) {
      for (const Json& s : j.at("scenarios")) {
        Scenario sc = scenario_from_json(s);
        for (const Scenario& prev : c.scenarios) {
          if (prev.name == sc.name) throw ConfigError("duplicate scenario name '" + sc.name + "'");
        }
        c.scenarios.push_back(std::move(sc));
      }
    }
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());
    c.formats = get_or<std::vector<std::string>>(j, "formats", c.formats);
    for (const auto& f : c.formats) {
      if (f != "table" && f != "json") throw ConfigError("unknown report format '" + f + "'");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad number: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string rational_to_string(const Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Json to_json(const SetReport& r) {
  Json honest = Json::array();
  for (const auto& h : r.honest) {
    honest.push_back({{"id", h.id},
                      {"accepted", h.accepted},
                      {"accepted_by_both", h.accepted_by_both},
                      {"forge_ratio", h.forge_ratio},
                      {"size_ratio", h.size_ratio}});
  }
  return Json{{"signature_space", r.signature_space}, {"coalition_accepted", r.coalition_accepted},
              {"honest", honest}};
}

Json to_json(const SignatureClassification& c) {
  Json levels = Json::object();
  for (const auto& [i, l] : c.per_recipient_max_level) levels[std::to_string(i)] = optional_level(l);
  return Json{{"authentic", c.authentic},
              {"valid", c.valid},
              {"acceptable_by", c.acceptable_by},
              {"fraudulent_for", c.fraudulent_for},
              {"max_level", levels},
              {"l_transferable", optional_level(c.l_transferable)}};
}

Json to_json(const BoundReport& b) {
  return Json{{"prefactor", b.prefactor}, {"per_event", b.per_event}, {"linearized", b.linearized},
              {"union", b.union_form},    {"clamped", b.clamped},     {"degenerate", b.degenerate}};
}

Json to_json(const AttackEstimate& e) {
  Json j{{"scenario", e.scenario},
         {"successes", e.successes},
         {"trials", e.trials},
         {"p_hat", e.p_hat},
         {"confidence", e.confidence},
         {"ci", {e.ci.low, e.ci.high}},
         {"bound", to_json(e.bound)},
         {"exact", nullptr},
         {"max_disagreement", e.max_disagreement},
         {"bound_ok", e.bound_ok}};
  if (e.exact) {
    j["exact"] = {{"value", rational_to_string(*e.exact)}, {"approx", e.exact->convert_to<double>()}};
  }
  return j;
}

}  // namespace uss
