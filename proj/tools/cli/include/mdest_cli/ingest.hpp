#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mdest/moments.hpp"
#include "mdest/simlab/simulate.hpp"

namespace mdest::cli {

struct IngestedData {
  bool iv = false;         // z column present
  bool weighted = false;   // weight column present
  std::vector<GroupSample> samples;            // first-appearance order
  std::vector<Eigen::VectorXd> policies;       // aligned with samples
  Eigen::Index policy_dim = 0;
};

/// Units CSV `group_id,delta_y,e[,z][,weight]` plus policy CSV `group_id,w_1..w_p`.
IngestedData ingest_units(const std::filesystem::path& units, const std::filesystem::path& policies);

/// Auxiliary CSV `group_id,h2_11,...,h2_kk` (row-major); keyed by group id.
std::map<std::string, Eigen::MatrixXd> ingest_auxiliary(const std::filesystem::path& path, Eigen::Index k);

/// Writes units.csv, policies.csv (the given policy columns only) and
/// auxiliary.csv (population Jacobians) into `dir`.
void export_dataset(const sim::SimDataset& data, const std::vector<Eigen::Index>& columns,
                    const std::filesystem::path& dir);

}  // namespace mdest::cli
