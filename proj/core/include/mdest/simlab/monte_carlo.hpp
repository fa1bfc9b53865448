#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mdest/diagnostics.hpp"
#include "mdest/simlab/scenario.hpp"
#include "mdest/simlab/simulate.hpp"

namespace mdest::sim {

enum class Estimator { md, md_alt, gmm, tsls_pooled, oracle };
std::string_view to_string(Estimator e) noexcept;
/// Throws config error for unknown tags.
Estimator parse_estimator(std::string_view tag);

/// Rejects estimator / design combinations that cannot run.
void check_estimators(const ScenarioConfig& cfg, const std::vector<Estimator>& estimators);

struct EstimatorDraw {
  bool ok = false;
  std::string error;
  Eigen::VectorXd coef;  // policy coefficients
  Eigen::VectorXd se;    // EHW standard errors
  double dropped_share = 0.0;
};

struct ReplicationRecord {
  std::size_t index = 0;  // 1-based
  std::vector<EstimatorDraw> draws;  // aligned with the estimator list
};

/// Estimates of one replication on an already simulated dataset.
ReplicationRecord run_estimators(const ScenarioConfig& cfg, const SimDataset& data,
                                 const std::vector<Estimator>& estimators, std::size_t index);

/// Replications 1..R ordered by index; threads = 0 uses the hardware count.
std::vector<ReplicationRecord> run_replications(const ScenarioConfig& cfg, const std::vector<Estimator>& estimators,
                                                std::size_t replications, unsigned threads = 0);

struct McSummary {
  Estimator estimator = Estimator::md;
  std::string tag;
  std::size_t replications = 0;  // successful fits
  std::size_t failures = 0;
  Eigen::VectorXd truth;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;       // zero when only one replication succeeded
  Eigen::VectorXd mc_se;    // sd / sqrt(R)
  Eigen::VectorXd bias;     // mean - truth
  Eigen::VectorXd coverage; // share of 95% EHW intervals covering the truth
  double mean_dropped_share = 0.0;
};

std::vector<McSummary> summarize(const ScenarioConfig& cfg, const std::vector<Estimator>& estimators,
                                 const std::vector<ReplicationRecord>& records);

std::vector<McSummary> run_monte_carlo(const ScenarioConfig& cfg, const std::vector<Estimator>& estimators,
                                       std::size_t replications, unsigned threads = 0);

/// Drop-induced change of the oracle fit on true thetas against the bound.
struct BoundCheck {
  double realized = 0.0;  // |(alpha_sel - alpha_all, B_sel - B_all)|_F
  BoundReport bound;
};
BoundCheck selection_bound_check(const ScenarioConfig& cfg, std::size_t replication);

}  // namespace mdest::sim
