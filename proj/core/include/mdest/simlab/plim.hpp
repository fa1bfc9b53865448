#pragma once

#include <span>
#include <vector>

#include "mdest/gmm_estimator.hpp"
#include "mdest/simlab/scenario.hpp"

namespace mdest::sim {

/// P(first-stage Jacobian invertible) for a group with treated/complier
/// probability pi, mixed over the group-size law.
double selection_probability(Design design, double pi, const FiniteLaw& group_size);

enum class PlimTarget { oracle, md, md_alt, gmm };

/// Finite-support population implied by the scenario, with the effective
/// weight of the requested estimator in every state. B0_true is the
/// structural coefficient of the used policy columns; omitted columns stay in alpha.
DiscreteScenario induced_scenario(const ScenarioConfig& cfg, PlimTarget target);

struct TslsState {
  double alpha = 0.0;       // effect intercept net of included policy effects
  double policy = 0.0;
  double instrument = 0.0;  // group-level instrument of the pooled IV
  double compliance = 0.0;  // Cov(Z, E) within the group
  double prob = 0.0;
};

/// Compliance-weighted covariance ratio Cov^C[alpha, Z] / Cov^C[W, Z].
double tsls_weighted_cov_bias(std::span<const TslsState> states);

/// States of an IV scenario with scalar policy (the group instrument is W itself).
std::vector<TslsState> induced_tsls_states(const ScenarioConfig& cfg);

}  // namespace mdest::sim
