#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdest/gmm_estimator.hpp"
#include "mdest/oracle_spec.hpp"
#include "mdest/simlab/monte_carlo.hpp"
#include "mdest/simlab/scenario.hpp"

namespace mdest::cli {

using json = nlohmann::json;

enum class Method { md, md_alt, gmm, tsls };
std::string to_string(Method m);

/// Configuration of `estimate` and `diagnose`.
struct RunConfig {
  std::optional<Method> method;
  std::filesystem::path units;
  std::filesystem::path policies;
  std::optional<std::filesystem::path> auxiliary;
  json gamma = "first";
  json b0 = "effect";
  bool weight_by_size = false;
  GmmWeights::Kind gmm_weights = GmmWeights::Kind::identity;
  double rank_tol = default_rank_tol;
  bool per_group = true;

  json echo() const;
};

/// Configuration of `simulate`.
struct SimulateConfig {
  sim::ScenarioConfig scenario;
  std::vector<sim::Estimator> estimators;
  std::size_t replications = 0;
  unsigned threads = 0;
  bool plim = true;

  json echo() const;
};

/// Reads one JSON document; parse errors map to exit status 1.
json load_json(const std::filesystem::path& path);

/// Strict parsing: unknown keys are configuration errors. Relative data
/// paths resolve against `base_dir`.
RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir, bool method_required);
SimulateConfig parse_simulate_config(const json& doc, std::optional<std::uint64_t> seed_override);

/// Scenario from a preset name or an object (optionally based on a preset).
sim::ScenarioConfig parse_scenario(const json& spec);
json scenario_to_json(const sim::ScenarioConfig& cfg);

/// Builds the second-stage design for k moments and p policies.
OracleSpec resolve_design(const RunConfig& cfg, Eigen::Index k, Eigen::Index p, std::vector<double> group_weights);

}  // namespace mdest::cli
