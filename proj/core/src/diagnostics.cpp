#include "mdest/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mdest/error.hpp"
#include "mdest/linalg.hpp"

namespace mdest {

SelectionReport selection_report(std::span<const int> omega) {
  SelectionReport r;
  r.total = omega.size();
  require(r.total >= 1, ErrorKind::invalid_input, "selection report needs at least one group");
  for (int w : omega) {
    require(w == 0 || w == 1, ErrorKind::invalid_input, "selection indicators must be 0 or 1");
    if (w == 0) ++r.dropped;
  }
  const double g = static_cast<double>(r.total);
  r.share = static_cast<double>(r.dropped) / g;
  r.heuristic_threshold = 1.0 / std::sqrt(g);
  r.flag = r.share > r.heuristic_threshold;
  return r;
}

SelectionReport selection_report(std::span<const GroupEstimate> estimates) {
  std::vector<int> omega;
  omega.reserve(estimates.size());
  for (const auto& e : estimates) omega.push_back(e.omega());
  return selection_report(omega);
}

std::string_view to_string(ResidualSource source) noexcept {
  return source == ResidualSource::oracle ? "oracle" : "proxy";
}

BoundReport md_bias_bound(std::span<const Eigen::VectorXd> policies, std::span<const int> omega,
                          std::span<const Eigen::VectorXd> residuals, const OracleSpec& spec,
                          ResidualSource source) {
  const std::size_t n = policies.size();
  require(n >= 1 && omega.size() == n && residuals.size() == n, ErrorKind::invalid_input,
          "bias bound needs policies, indicators and residuals for every group");
  const Eigen::Index p = spec.p();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd x(p + 1);
  BoundReport r;
  r.source = source;
  std::size_t dropped = 0;
  for (std::size_t g = 0; g < n; ++g) {
    require(policies[g].size() == p && linalg::all_finite(policies[g]), ErrorKind::invalid_input, "bad policy vector");
    require(residuals[g].size() == spec.k() && linalg::all_finite(residuals[g]), ErrorKind::invalid_input,
            "bad residual vector");
    require(omega[g] == 0 || omega[g] == 1, ErrorKind::invalid_input, "selection indicators must be 0 or 1");
    r.max_policy_norm = std::max(r.max_policy_norm, policies[g].norm());
    r.max_residual_norm = std::max(r.max_residual_norm, residuals[g].norm());
    if (omega[g] == 0) {
      ++dropped;
      continue;
    }
    x(0) = 1.0;
    x.tail(p) = policies[g];
    m.noalias() += x * x.transpose();
  }
  m /= static_cast<double>(n);
  require(linalg::is_positive_definite(m, 1e-12), ErrorKind::design_deficient,
          "policy moment matrix of the retained groups is singular");
  r.kappa = spec.kappa();
  r.lambda_min_m = linalg::min_eigenvalue(m);
  r.dropped_share = static_cast<double>(dropped) / static_cast<double>(n);
  r.bound_value = (1.0 / std::min(1.0, r.kappa)) *
                  (std::sqrt(1.0 + r.max_policy_norm * r.max_policy_norm) / r.lambda_min_m) * r.max_residual_norm *
                  r.dropped_share;
  return r;
}

ConditioningSummary conditioning_summary(std::span<const GroupEstimate> estimates) {
  std::vector<double> sv;
  for (const auto& e : estimates) {
    if (!e.selected()) continue;
    const Eigen::VectorXd s = linalg::singular_values(e.h2_hat);
    sv.push_back(s(s.size() - 1));
  }
  ConditioningSummary c;
  c.selected = sv.size();
  if (sv.empty()) return c;
  std::sort(sv.begin(), sv.end());
  c.min_singular = sv.front();
  const std::size_t mid = sv.size() / 2;
  c.median_singular = sv.size() % 2 == 1 ? sv[mid] : (sv[mid - 1] + sv[mid]) / 2.0;
  return c;
}

double banking_weight(double p_a, double p_b) {
  require(std::isfinite(p_a) && std::isfinite(p_b) && p_a >= 0.0 && p_a <= 1.0 && p_b >= 0.0 && p_b <= 1.0,
          ErrorKind::invalid_input, "banking probabilities must lie in [0, 1]");
  const double s = p_a + p_b;
  require(s > 0.0, ErrorKind::invalid_input, "banking weight undefined when pA + pB = 0");
  return p_a * p_b / (s * s);
}

double banking_bias(std::span<const BankingState> states) {
  require(!states.empty(), ErrorKind::invalid_input, "banking scenario has no states");
  double sw = 0, su = 0, sdw = 0;
  std::vector<double> w(states.size());
  double total = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    require(std::isfinite(s.delta_u) && std::isfinite(s.delta_w) && std::isfinite(s.prob) && s.prob >= 0.0,
            ErrorKind::invalid_input, "bad banking state");
    total += s.prob;
    w[i] = s.prob * banking_weight(s.p_a, s.p_b);
    sw += w[i];
    su += w[i] * s.delta_u;
    sdw += w[i] * s.delta_w;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorKind::invalid_input, "state probabilities must sum to 1");
  require(sw > 0.0, ErrorKind::degenerate_scenario, "all banking weights are zero");
  const double mu = su / sw;
  const double mw = sdw / sw;
  double cov = 0, var = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double dw = states[i].delta_w - mw;
    cov += w[i] * (states[i].delta_u - mu) * dw;
    var += w[i] * dw * dw;
  }
  require(var > 1e-300 && var > 1e-14 * sw * (1.0 + mw * mw), ErrorKind::degenerate_scenario,
          "weighted variance of the policy change is zero");
  return cov / var;
}

}  // namespace mdest
