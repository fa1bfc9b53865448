#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdest/first_stage.hpp"
#include "mdest/oracle_spec.hpp"

namespace mdest {

/// Second-stage fit. Parameters are ordered (alpha coordinates in the
/// complement frame, basis coefficients of B); vcov and bread use that order.
struct FitResult {
  Eigen::MatrixXd B_hat;
  Eigen::VectorXd alpha_hat;
  Eigen::VectorXd alpha_coords;
  Eigen::VectorXd basis_coef;
  Eigen::MatrixXd alpha_frame;

  std::vector<std::size_t> used;             // input positions of the groups in the fit
  std::vector<Eigen::VectorXd> lambda_hat;   // aligned with `used`
  std::vector<Eigen::VectorXd> residuals;    // aligned with `used`, k-space
  std::vector<Eigen::VectorXd> scores;       // per-group score contributions
  Eigen::MatrixXd bread;
  Eigen::MatrixXd vcov;

  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
  std::size_t n_weak_lambda = 0;  // groups whose lambda needed a pseudo-inverse
  double objective = 0.0;

  Eigen::Index n_params() const { return alpha_coords.size() + basis_coef.size(); }
  Eigen::MatrixXd vcov_basis() const;
  Eigen::VectorXd se_basis() const;
  /// Standard errors of alpha_hat entries (alpha = frame * coords).
  Eigen::VectorXd se_alpha() const;
};

/// Unweighted-within-group MD: minimise sum_g omega_g w_g |theta_g - alpha - gamma lambda_g - B W_g|^2.
FitResult fit_md(std::span<const GroupEstimate> estimates, std::span<const Eigen::VectorXd> policies,
                 const OracleSpec& spec);

/// Same problem with explicit thetas and selection indicators (0/1).
FitResult fit_md(std::span<const Eigen::VectorXd> thetas, std::span<const int> omega,
                 std::span<const Eigen::VectorXd> policies, const OracleSpec& spec);

/// MD with a symmetric PSD k x k weight per group (one per estimate, selected or not).
FitResult fit_md_weighted(std::span<const GroupEstimate> estimates, std::span<const Eigen::VectorXd> policies,
                          const OracleSpec& spec, std::span<const Eigen::MatrixXd> weights);

/// Sandwich variance from the fit's score contributions. `clusters`, when
/// non-empty, holds one key per input group and sums scores within keys.
Eigen::MatrixXd ehw_vcov(const FitResult& fit, std::span<const Eigen::VectorXd> policies, const OracleSpec& spec,
                         std::span<const std::string> clusters = {});

}  // namespace mdest
