#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdest/gmm_estimator.hpp"
#include "mdest/moments.hpp"
#include "mdest/oracle_spec.hpp"

namespace mdest::sim {

enum class Design { did, iv, composition };
std::string_view to_string(Design d) noexcept;

/// Distribution on a finite list of values.
struct FiniteLaw {
  std::vector<double> values;
  std::vector<double> probs;

  static FiniteLaw constant(double v) { return {{v}, {1.0}}; }
  static FiniteLaw two_point(double a, double b, double p_b = 0.5) { return {{a, b}, {1.0 - p_b, p_b}}; }

  void validate(std::string_view name) const;
  double draw(std::mt19937_64& eng) const;
  double mean() const;
};

struct PolicyLaw {
  enum class Kind { bernoulli, grid, pair };
  Kind kind = Kind::bernoulli;
  double rho = 0.5;                             // bernoulli
  std::vector<double> grid;                     // uniform over these values
  std::array<double, 4> pair_probs{};           // P(00), P(01), P(10), P(11) for (W1, W2)

  Eigen::Index dim() const { return kind == Kind::pair ? 2 : 1; }
  std::vector<std::pair<Eigen::VectorXd, double>> support() const;
  void validate() const;
};

/// Treated (or complier) probability as a function of alpha, a unit trait and W.
struct SelectionLink {
  enum class Kind { logistic, constant };
  Kind kind = Kind::logistic;
  double a0 = 0.0;
  double a_alpha = 0.0;
  double a_trait = 0.0;
  std::vector<double> a_w;  // one coefficient per policy column (empty = zeros)
  double pi = 0.5;          // constant link

  double eval(double alpha, double trait, const Eigen::VectorXd& w) const;
};

struct NoiseLaw {
  double sigma = 1.0;
  double mix_prob = 0.0;   // probability of the second component
  double mix_sigma = 0.0;
};

/// Synthetic hierarchical DGP. Per group: n ~ group_size, W ~ policy,
/// alpha ~ alpha (effect intercept), delta ~ delta (trend). Effects
/// tau_g = alpha + beta' W (+ trait_effect * trait for composition units).
struct ScenarioConfig {
  std::string name = "custom";
  Design design = Design::did;
  std::size_t groups = 100;
  FiniteLaw group_size = FiniteLaw::constant(50);
  PolicyLaw policy;
  FiniteLaw alpha = FiniteLaw::constant(0.0);
  FiniteLaw delta = FiniteLaw::constant(0.0);
  std::vector<double> beta{0.0};
  SelectionLink link;
  FiniteLaw trait = FiniteLaw::two_point(0.0, 1.0);  // composition only
  double trait_effect = 0.0;                          // composition only
  NoiseLaw noise;
  std::uint64_t seed = 1;
  /// Weighting of the pooled estimator; unset means pooled_ols for DiD-type
  /// designs and identity for IV.
  std::optional<GmmWeights::Kind> gmm_weights;
  /// Policy columns used in the second stage (0-based); empty = all.
  std::vector<Eigen::Index> policy_columns;
  double rank_tol = default_rank_tol;

  /// Throws config errors.
  void validate() const;
  Eigen::Index p() const { return policy.dim(); }
  std::vector<Eigen::Index> used_columns() const;
  GmmWeights::Kind gmm_kind() const;
  /// theta = (delta, tau), gamma = e_1, B acting on tau for the used columns.
  OracleSpec second_stage() const;
};

std::vector<std::string> scenario_presets();
/// Throws config error listing the available names when unknown.
ScenarioConfig scenario_preset(std::string_view name);

}  // namespace mdest::sim
