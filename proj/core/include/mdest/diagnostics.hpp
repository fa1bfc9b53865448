#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string_view>

#include "mdest/first_stage.hpp"
#include "mdest/oracle_spec.hpp"

namespace mdest {

struct SelectionReport {
  std::size_t total = 0;
  std::size_t dropped = 0;
  double share = 0.0;
  double heuristic_threshold = 0.0;  // 1 / sqrt(G)
  bool flag = false;                 // share > threshold
};

SelectionReport selection_report(std::span<const GroupEstimate> estimates);
SelectionReport selection_report(std::span<const int> omega);

enum class ResidualSource { oracle, proxy };
std::string_view to_string(ResidualSource source) noexcept;

struct BoundReport {
  double bound_value = 0.0;
  double kappa = 1.0;
  double lambda_min_m = 0.0;
  double max_policy_norm = 0.0;
  double max_residual_norm = 0.0;
  double dropped_share = 0.0;
  ResidualSource source = ResidualSource::oracle;
};

/// Upper bound on |(d_alpha, d_B)|_F from dropping the unselected groups:
/// (1/min(1,kappa)) * sqrt(1 + max|W|^2) / lambda_min(M) * max|r| * dropped/G
/// with M = (1/G) sum omega (1,W)'(1,W). Residuals: one k-vector per group.
BoundReport md_bias_bound(std::span<const Eigen::VectorXd> policies, std::span<const int> omega,
                          std::span<const Eigen::VectorXd> residuals, const OracleSpec& spec,
                          ResidualSource source = ResidualSource::oracle);

struct ConditioningSummary {
  std::size_t selected = 0;
  double min_singular = 0.0;     // over selected groups, smallest singular value of H2_hat
  double median_singular = 0.0;
};

ConditioningSummary conditioning_summary(std::span<const GroupEstimate> estimates);

/// pA pB / (pA + pB)^2
double banking_weight(double p_a, double p_b);

struct BankingState {
  double delta_u = 0.0;
  double delta_w = 0.0;
  double p_a = 0.0;
  double p_b = 0.0;
  double prob = 0.0;
};

/// Weighted covariance ratio Cov^w[du, dW] / Var^w[dW] with w = banking_weight.
double banking_bias(std::span<const BankingState> states);

}  // namespace mdest
