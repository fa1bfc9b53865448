#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>

#include "mdest/md_estimator.hpp"
#include "mdest/moments.hpp"

namespace mdest::sim {

/// Just-identified within-group IV (Wald ratio); nullopt when Cov(Z, E) vanishes in-sample.
std::optional<Eigen::VectorXd> tsls_group(const GroupSample& sample, double rank_tol = default_rank_tol);

/// Pooled TSLS of dY on {group dummies, E, E*W} instrumented by {group dummies, Z, Z*W}.
/// `spec` must be the effect-row design (k = 2, gamma = e_1, policies on tau).
/// Group sizes enter as frequency weights; the variance is clustered by group.
FitResult tsls_pooled(std::span<const MomentAverages> averages, std::span<const std::size_t> group_sizes,
                      std::span<const Eigen::VectorXd> policies, const OracleSpec& spec);
FitResult tsls_pooled(std::span<const GroupSample> samples, std::span<const Eigen::VectorXd> policies,
                      const OracleSpec& spec);

}  // namespace mdest::sim
