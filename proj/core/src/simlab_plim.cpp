#include "mdest/simlab/plim.hpp"

#include <cmath>

#include "mdest/error.hpp"
#include "mdest/simlab/simulate.hpp"

namespace mdest::sim {

double selection_probability(Design design, double pi, const FiniteLaw& group_size) {
  double out = 0.0;
  for (std::size_t i = 0; i < group_size.values.size(); ++i) {
    const double n = group_size.values[i];
    double p_sel = 0.0;
    if (design == Design::iv) {
      // Singular iff no Z = 1 complier, or every unit has Z = 1.
      p_sel = 1.0 - (std::pow(1.0 - pi / 2.0, n) + std::pow(0.5, n) - std::pow((1.0 - pi) / 2.0, n));
    } else {
      p_sel = 1.0 - std::pow(pi, n) - std::pow(1.0 - pi, n);
    }
    out += group_size.probs[i] * p_sel;
  }
  return out;
}

namespace {

Eigen::MatrixXd pooled_ols_weight(double q) {
  Eigen::MatrixXd h(2, 2);
  h << 1.0, q, q, q;
  return h;
}

Eigen::MatrixXd iv_jacobian(double pi) {
  Eigen::MatrixXd h(2, 2);
  h << 1.0, pi / 2.0, 0.5, pi / 2.0;
  return h;
}

}  // namespace

DiscreteScenario induced_scenario(const ScenarioConfig& cfg, PlimTarget target) {
  cfg.validate();
  const auto cols = cfg.used_columns();
  const OracleSpec design = cfg.second_stage();
  const Eigen::VectorXd truth = scenario_truth(cfg);
  const Eigen::MatrixXd b0 = design.compose(truth);
  if (target == PlimTarget::gmm && cfg.gmm_kind() == GmmWeights::Kind::pooled_ols)
    require(cfg.design != Design::iv, ErrorKind::unsupported_scenario, "pooled_ols weighting is not defined for IV");

  std::vector<ScenarioState> states;
  for (const auto& [w, pw] : cfg.policy.support()) {
    Eigen::VectorXd wu(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) wu(static_cast<Eigen::Index>(j)) = w(cols[j]);
    for (std::size_t ia = 0; ia < cfg.alpha.values.size(); ++ia) {
      for (std::size_t id = 0; id < cfg.delta.values.size(); ++id) {
        const double a = cfg.alpha.values[ia];
        const double prob = pw * cfg.alpha.probs[ia] * cfg.delta.probs[id];
        if (prob == 0.0) continue;
        const double pi = cfg.design == Design::composition ? composition_cell(cfg, w).treated_share
                                                            : cfg.link.eval(a, 0.0, w);
        ScenarioState s;
        s.policy = wu;
        s.alpha = Eigen::Vector2d(cfg.delta.values[id], true_tau(cfg, a, w)) - b0 * wu;
        s.prob = prob;
        switch (target) {
          case PlimTarget::oracle:
          case PlimTarget::md_alt:
            s.weight = Eigen::MatrixXd::Identity(2, 2);
            break;
          case PlimTarget::md:
            s.weight = selection_probability(cfg.design, pi, cfg.group_size) * Eigen::MatrixXd::Identity(2, 2);
            break;
          case PlimTarget::gmm:
            if (cfg.gmm_kind() == GmmWeights::Kind::pooled_ols) {
              s.weight = pooled_ols_weight(pi);
            } else {
              const Eigen::MatrixXd h = cfg.design == Design::iv ? iv_jacobian(pi) : pooled_ols_weight(pi);
              s.weight = h.transpose() * h;
            }
            break;
        }
        states.push_back(std::move(s));
      }
    }
  }
  // Normalise away rounding in the product probabilities.
  double total = 0.0;
  for (const auto& s : states) total += s.prob;
  for (auto& s : states) s.prob /= total;
  return DiscreteScenario(std::move(states), b0, design);
}

double tsls_weighted_cov_bias(std::span<const TslsState> states) {
  require(!states.empty(), ErrorKind::invalid_input, "no states");
  double sc = 0, sca = 0, scw = 0, scz = 0;
  for (const auto& s : states) {
    require(s.prob >= 0.0 && s.compliance >= 0.0, ErrorKind::invalid_input, "bad TSLS state");
    const double c = s.prob * s.compliance;
    sc += c;
    sca += c * s.alpha;
    scw += c * s.policy;
    scz += c * s.instrument;
  }
  require(sc > 0.0, ErrorKind::degenerate_scenario, "no compliance anywhere on the support");
  const double ma = sca / sc, mw = scw / sc, mz = scz / sc;
  double cov_az = 0, cov_wz = 0;
  for (const auto& s : states) {
    const double c = s.prob * s.compliance;
    cov_az += c * (s.alpha - ma) * (s.instrument - mz);
    cov_wz += c * (s.policy - mw) * (s.instrument - mz);
  }
  require(std::abs(cov_wz) > 1e-14 * sc, ErrorKind::degenerate_scenario, "weighted Cov[W, Z] is zero");
  return cov_az / cov_wz;
}

std::vector<TslsState> induced_tsls_states(const ScenarioConfig& cfg) {
  cfg.validate();
  require(cfg.design == Design::iv && cfg.p() == 1, ErrorKind::unsupported_scenario,
          "TSLS enumeration needs an IV scenario with a scalar policy");
  std::vector<TslsState> out;
  for (const auto& [w, pw] : cfg.policy.support()) {
    for (std::size_t ia = 0; ia < cfg.alpha.values.size(); ++ia) {
      const double a = cfg.alpha.values[ia];
      TslsState s;
      s.alpha = a;
      s.policy = w(0);
      s.instrument = w(0);
      s.compliance = cfg.link.eval(a, 0.0, w) / 4.0;  // Cov(Z, Z C) with Z ~ Bernoulli(1/2)
      s.prob = pw * cfg.alpha.probs[ia];
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace mdest::sim
