#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "mdest/moments.hpp"
#include "mdest/simlab/scenario.hpp"

namespace mdest::sim {

struct SimGroup {
  std::string id;
  Eigen::VectorXd policy;  // full policy vector
  double alpha = 0.0;
  double delta = 0.0;
  double pi = 0.0;         // P(E = 1) for DiD/composition, complier share for IV
  Eigen::VectorXd theta;   // true (delta, tau_g)
  std::vector<double> delta_y, e, z;  // z empty unless IV
};

struct SimDataset {
  Design design = Design::did;
  std::vector<SimGroup> groups;

  std::size_t size() const { return groups.size(); }
  MomentAverages averages(std::size_t g) const;
  GroupSample sample(std::size_t g) const;
  /// Known population Jacobian of the group's moments.
  Eigen::MatrixXd population_h2(std::size_t g) const;
  std::vector<Eigen::VectorXd> policies(const std::vector<Eigen::Index>& columns) const;
  std::vector<Eigen::VectorXd> thetas() const;
};

SimDataset simulate_did(const ScenarioConfig& cfg, std::size_t replication);
SimDataset simulate_iv(const ScenarioConfig& cfg, std::size_t replication);
SimDataset simulate_composition(const ScenarioConfig& cfg, std::size_t replication);
/// Dispatch on cfg.design.
SimDataset simulate(const ScenarioConfig& cfg, std::size_t replication);

/// P(trait = 1-weighted mean | E = 1) and P(E = 1) for a composition group with policy w.
struct CompositionCell {
  double treated_share = 0.0;
  double trait_mean_treated = 0.0;
};
CompositionCell composition_cell(const ScenarioConfig& cfg, const Eigen::VectorXd& w);

/// True tau_g for a group with effect intercept alpha and policy w.
double true_tau(const ScenarioConfig& cfg, double alpha, const Eigen::VectorXd& w);

/// True effect coefficients in the basis of cfg.second_stage() when every
/// column is used; with a column subset, the structural coefficients of those columns.
Eigen::VectorXd scenario_truth(const ScenarioConfig& cfg);

}  // namespace mdest::sim
