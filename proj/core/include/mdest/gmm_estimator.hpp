#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "mdest/md_estimator.hpp"
#include "mdest/moments.hpp"
#include "mdest/oracle_spec.hpp"

namespace mdest {

/// Moment weighting for the pooled estimator.
///  identity   : A_g = I, effective weight H2' H2
///  pooled_ols : quadratic built from (H1, H2) directly; for symmetric DiD
///               Jacobians this is pooled OLS with group intercepts
///  custom     : one symmetric PSD A_g per group
class GmmWeights {
 public:
  enum class Kind { identity, pooled_ols, custom };

  static GmmWeights identity() { return GmmWeights(Kind::identity, {}); }
  static GmmWeights pooled_ols() { return GmmWeights(Kind::pooled_ols, {}); }
  /// Throws invalid-input unless every matrix is symmetric (1e-12) with eigenvalues >= -1e-12.
  static GmmWeights custom(std::vector<Eigen::MatrixXd> per_group);

  Kind kind() const { return kind_; }
  const std::vector<Eigen::MatrixXd>& matrices() const { return mats_; }

 private:
  GmmWeights(Kind kind, std::vector<Eigen::MatrixXd> mats) : kind_(kind), mats_(std::move(mats)) {}
  Kind kind_;
  std::vector<Eigen::MatrixXd> mats_;
};

/// H2' A H2
Eigen::MatrixXd effective_weight(const Eigen::MatrixXd& h2, const Eigen::MatrixXd& a);

/// One-step estimator on pooled moments. No group is dropped. Residuals are
/// moment residuals H1 - H2 (alpha + gamma lambda + B W).
FitResult fit_gmm_pooled(std::span<const GroupSample> samples, std::span<const Eigen::VectorXd> policies,
                         const OracleSpec& spec, const GmmWeights& weights = GmmWeights::identity());
FitResult fit_gmm_pooled(std::span<const MomentAverages> averages, std::span<const Eigen::VectorXd> policies,
                         const OracleSpec& spec, const GmmWeights& weights = GmmWeights::identity());

struct ScenarioState {
  Eigen::VectorXd policy;  // W_s
  Eigen::VectorXd alpha;   // alpha_s
  Eigen::MatrixXd weight;  // effective weight
  double prob = 0.0;
};

/// Finite-support population: theta_s = alpha_s + B0_true W_s, weighted by A_s.
class DiscreteScenario {
 public:
  DiscreteScenario(std::vector<ScenarioState> states, Eigen::MatrixXd b0_true, OracleSpec design);

  const std::vector<ScenarioState>& states() const { return states_; }
  const Eigen::MatrixXd& b0_true() const { return b0_; }
  const OracleSpec& design() const { return design_; }

 private:
  std::vector<ScenarioState> states_;
  Eigen::MatrixXd b0_;
  OracleSpec design_;
};

struct GmmLimit {
  Eigen::MatrixXd b_lim;
  Eigen::VectorXd alpha0;      // weighted population intercept
  Eigen::VectorXd alpha_lim;   // limit of the intercept estimate
  Eigen::MatrixXd bias;        // b_lim - b0_true
  Eigen::VectorXd coef_bias;   // bias in basis coordinates
};

/// Exact probability limit of the weighted estimator by enumeration.
GmmLimit gmm_plim(const DiscreteScenario& scn);

/// M_gamma Cov[A eps0, W] (k x p).
Eigen::MatrixXd consistency_condition(const DiscreteScenario& scn);

/// Scalar binary-policy state with the weight under each policy value.
struct WeightedErrorState {
  double policy = 0.0;  // 0 or 1
  double error = 0.0;
  double weight_untreated = 0.0;
  double weight_treated = 0.0;
  double prob = 0.0;
};

struct BiasDecomposition {
  double endogenous = 0.0;
  double statistical = 0.0;
  double total = 0.0;  // E[s1 e | W=1] - E[s0 e | W=0], computed directly
};

BiasDecomposition bias_decomposition(std::span<const WeightedErrorState> states);

}  // namespace mdest
