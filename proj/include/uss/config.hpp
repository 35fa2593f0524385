#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "uss/analysis.hpp"
#include "uss/framework.hpp"
#include "uss/keystore.hpp"
#include "uss/params.hpp"

namespace uss {

using Json = nlohmann::ordered_json;

/// Everything a CLI run reads from its config file.
struct RunConfig {
  ProtocolParams params;
  KeySource key_source = SeededRandom{0};
  std::vector<Scenario> scenarios;
  std::filesystem::path output_dir = "uss-out";
  std::vector<std::string> formats{"table"};

  /// Declared scenario by name; throws ScenarioError.
  const Scenario& scenario(const std::string& name) const;
};

/// Fractions may be written as "p/q" strings, decimal strings, or numbers.
Fraction fraction_from_json(const Json& j);

ProtocolParams params_from_json(const Json& j);
Json params_to_json(const ProtocolParams& p);

Scenario scenario_from_json(const Json& j);

/// Throws ConfigError on malformed input. A file key source without a
/// directory falls back to $USS_KEYDIR.
RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);

Json to_json(const SetReport& r);
Json to_json(const SignatureClassification& c);
Json to_json(const BoundReport& b);
Json to_json(const AttackEstimate& e);

/// Exact rational as "p/q" (or "p" when integral).
std::string rational_to_string(const Rational& r);

}  // namespace uss
