#include "mdest/gmm_estimator.hpp"

#include <cmath>

#include "mdest/error.hpp"
#include "mdest/linalg.hpp"
#include "normal_equations.hpp"

namespace mdest {

namespace {

void check_sym_psd(const Eigen::MatrixXd& a, const char* what) {
  require(a.rows() == a.cols() && linalg::all_finite(a), ErrorKind::invalid_input,
          std::string(what) + " must be a finite square matrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  require((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, ErrorKind::invalid_input,
          std::string(what) + " is not symmetric");
  require(a.rows() == 0 || linalg::min_eigenvalue(a) >= -1e-12 * scale, ErrorKind::invalid_input,
          std::string(what) + " is not positive semidefinite");
}

}  // namespace

GmmWeights GmmWeights::custom(std::vector<Eigen::MatrixXd> per_group) {
  for (const auto& a : per_group) check_sym_psd(a, "GMM weight");
  return GmmWeights(Kind::custom, std::move(per_group));
}

Eigen::MatrixXd effective_weight(const Eigen::MatrixXd& h2, const Eigen::MatrixXd& a) {
  require(h2.rows() == h2.cols() && a.rows() == h2.rows() && a.cols() == h2.rows(), ErrorKind::invalid_input,
          "effective_weight needs conformable square matrices");
  return h2.transpose() * a * h2;
}

FitResult fit_gmm_pooled(std::span<const MomentAverages> averages, std::span<const Eigen::VectorXd> policies,
                         const OracleSpec& spec, const GmmWeights& weights) {
  const std::size_t n_groups = averages.size();
  detail::check_policies(spec, policies, n_groups);
  if (weights.kind() == GmmWeights::Kind::custom)
    require(weights.matrices().size() == n_groups, ErrorKind::invalid_input, "one GMM weight per group is required");
  require(n_groups > 0, ErrorKind::no_data, "no groups supplied");

  std::vector<std::size_t> used(n_groups);
  std::vector<double> scalar_w(n_groups);
  std::vector<Eigen::MatrixXd> a(n_groups);
  std::vector<Eigen::VectorXd> b(n_groups);
  const Eigen::Index k = spec.k();
  for (std::size_t g = 0; g < n_groups; ++g) {
    const auto& av = averages[g];
    require(av.h1.size() == k && av.h2.rows() == k && av.h2.cols() == k, ErrorKind::invalid_input,
            "moment dimension differs from the design");
    require(linalg::all_finite(av.h1) && linalg::all_finite(av.h2), ErrorKind::invalid_input,
            "moment averages have non-finite entries");
    used[g] = g;
    scalar_w[g] = spec.weight(g);
    switch (weights.kind()) {
      case GmmWeights::Kind::identity:
        a[g] = av.h2.transpose() * av.h2;
        b[g] = av.h2.transpose() * av.h1;
        break;
      case GmmWeights::Kind::custom:
        require(weights.matrices()[g].rows() == k, ErrorKind::invalid_input, "GMM weight is not k x k");
        a[g] = av.h2.transpose() * weights.matrices()[g] * av.h2;
        b[g] = av.h2.transpose() * weights.matrices()[g] * av.h1;
        break;
      case GmmWeights::Kind::pooled_ols:
        require((av.h2 - av.h2.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, av.h2.cwiseAbs().maxCoeff()),
                ErrorKind::invalid_input, "pooled_ols weighting needs symmetric moment Jacobians");
        a[g] = (av.h2 + av.h2.transpose()) / 2.0;
        b[g] = av.h1;
        break;
    }
    a[g] *= scalar_w[g];
    b[g] *= scalar_w[g];
  }
  detail::check_design(scalar_w);
  FitResult fit = detail::fit_quadratic(spec, policies, used, a, b, n_groups);
  for (std::size_t g = 0; g < n_groups; ++g)
    fit.residuals[g] = averages[g].h1 - averages[g].h2 * fit.residuals[g];
  return fit;
}

FitResult fit_gmm_pooled(std::span<const GroupSample> samples, std::span<const Eigen::VectorXd> policies,
                         const OracleSpec& spec, const GmmWeights& weights) {
  std::vector<MomentAverages> avgs;
  avgs.reserve(samples.size());
  for (const auto& s : samples) avgs.push_back(average_moments(s));
  return fit_gmm_pooled(avgs, policies, spec, weights);
}

DiscreteScenario::DiscreteScenario(std::vector<ScenarioState> states, Eigen::MatrixXd b0_true, OracleSpec design)
    : states_(std::move(states)), b0_(std::move(b0_true)), design_(std::move(design)) {
  require(!states_.empty(), ErrorKind::invalid_input, "scenario has no states");
  const Eigen::Index k = design_.k();
  const Eigen::Index p = design_.p();
  double total = 0.0;
  for (const auto& s : states_) {
    require(s.policy.size() == p && s.alpha.size() == k, ErrorKind::invalid_input, "state dimensions differ from the design");
    require(linalg::all_finite(s.policy) && linalg::all_finite(s.alpha), ErrorKind::invalid_input,
            "state has non-finite entries");
    require(s.weight.rows() == k && s.weight.cols() == k, ErrorKind::invalid_input, "state weight is not k x k");
    check_sym_psd(s.weight, "state weight");
    require(std::isfinite(s.prob) && s.prob >= 0.0, ErrorKind::invalid_input, "state probabilities must be >= 0");
    total += s.prob;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorKind::invalid_input, "state probabilities must sum to 1");
  design_.coordinates(b0_);  // throws unless B0_true lies in the policy subspace
}

namespace {

struct Enumerated {
  std::vector<detail::Concentrated> conc;
  Eigen::VectorXd alpha0_coords;
  Eigen::VectorXd alpha0;
  std::vector<Eigen::VectorXd> weighted_eps;  // A_s eps0_s
};

Enumerated enumerate(const DiscreteScenario& scn) {
  const OracleSpec& d = scn.design();
  const Eigen::MatrixXd& u = d.complement();
  const Eigen::Index ka = u.cols();
  Enumerated out;
  Eigen::MatrixXd h11 = Eigen::MatrixXd::Zero(ka, ka);
  Eigen::VectorXd r1 = Eigen::VectorXd::Zero(ka);
  for (const auto& s : scn.states()) {
    out.conc.push_back(detail::concentrate(d.gamma(), s.weight, s.weight * s.alpha));
    const Eigen::MatrixXd qc = u.transpose() * out.conc.back().q * u;
    h11 += s.prob * qc;
    r1 += s.prob * (qc * (u.transpose() * s.alpha));
  }
  h11 = (h11 + h11.transpose()) / 2.0;
  require(linalg::is_positive_definite(h11, 1e-12), ErrorKind::degenerate_scenario,
          "population intercept block is singular");
  out.alpha0_coords = h11.llt().solve(r1);
  out.alpha0 = u * out.alpha0_coords;
  for (std::size_t i = 0; i < scn.states().size(); ++i)
    out.weighted_eps.push_back(out.conc[i].q * (scn.states()[i].alpha - out.alpha0));
  return out;
}

}  // namespace

GmmLimit gmm_plim(const DiscreteScenario& scn) {
  const OracleSpec& d = scn.design();
  const Eigen::MatrixXd& u = d.complement();
  const Eigen::Index ka = u.cols();
  const Eigen::Index p = d.p();
  const Eigen::Index kp = ka * p;
  const Enumerated en = enumerate(scn);

  // Unrestricted blocks in vec(B_tilde), B_tilde = U' B (ka x p).
  Eigen::MatrixXd h11 = Eigen::MatrixXd::Zero(ka, ka);
  Eigen::MatrixXd h21 = Eigen::MatrixXd::Zero(kp, ka);
  Eigen::MatrixXd h22 = Eigen::MatrixXd::Zero(kp, kp);
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(ka);
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(kp);
  for (std::size_t i = 0; i < scn.states().size(); ++i) {
    const auto& s = scn.states()[i];
    const Eigen::MatrixXd qc = u.transpose() * en.conc[i].q * u;
    const Eigen::VectorXd ge = u.transpose() * en.weighted_eps[i];
    h11 += s.prob * qc;
    h21 += s.prob * linalg::kron(s.policy, qc);
    h22 += s.prob * linalg::kron(s.policy * s.policy.transpose(), qc);
    c1 += s.prob * ge;
    c2 += s.prob * linalg::vec(ge * s.policy.transpose());
  }
  h11 = (h11 + h11.transpose()) / 2.0;
  const Eigen::MatrixXd h11_inv = h11.llt().solve(Eigen::MatrixXd::Identity(ka, ka));
  Eigen::MatrixXd schur = h22 - h21 * h11_inv * h21.transpose();
  schur = (schur + schur.transpose()) / 2.0;
  const double scale = std::max(h22.cwiseAbs().maxCoeff(), 1e-300);
  require(kp == 0 || linalg::min_eigenvalue(schur) > 1e-12 * scale, ErrorKind::degenerate_scenario,
          "population Schur complement is singular");

  GmmLimit out;
  Eigen::VectorXd delta_coef = Eigen::VectorXd::Zero(d.m());
  Eigen::VectorXd delta_vec = Eigen::VectorXd::Zero(kp);
  if (kp > 0 && d.m() > 0) {
    Eigen::LLT<Eigen::MatrixXd> sllt(schur);
    const Eigen::VectorXd unrestricted = sllt.solve(c2 - h21 * h11_inv * c1);
    // S-metric projection onto the image of the policy subspace.
    Eigen::MatrixXd v(kp, d.m());
    for (Eigen::Index j = 0; j < d.m(); ++j)
      v.col(j) = linalg::vec(u.transpose() * d.basis()[static_cast<std::size_t>(j)]);
    const Eigen::MatrixXd vsv = v.transpose() * schur * v;
    delta_coef = vsv.ldlt().solve(v.transpose() * (schur * unrestricted));
    delta_vec = v * delta_coef;
  }
  const Eigen::MatrixXd delta_b = d.compose(delta_coef);
  out.b_lim = scn.b0_true() + delta_b;
  out.bias = delta_b;
  out.coef_bias = delta_coef;
  out.alpha0 = en.alpha0;
  out.alpha_lim = u * (en.alpha0_coords + h11_inv * (c1 - h21.transpose() * delta_vec));
  return out;
}

Eigen::MatrixXd consistency_condition(const DiscreteScenario& scn) {
  const OracleSpec& d = scn.design();
  const Enumerated en = enumerate(scn);
  Eigen::VectorXd mean_x = Eigen::VectorXd::Zero(d.k());
  Eigen::VectorXd mean_w = Eigen::VectorXd::Zero(d.p());
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(d.k(), d.p());
  for (std::size_t i = 0; i < scn.states().size(); ++i) {
    const auto& s = scn.states()[i];
    mean_x += s.prob * en.weighted_eps[i];
    mean_w += s.prob * s.policy;
    cross += s.prob * en.weighted_eps[i] * s.policy.transpose();
  }
  return d.projector() * (cross - mean_x * mean_w.transpose());
}

BiasDecomposition bias_decomposition(std::span<const WeightedErrorState> states) {
  require(!states.empty(), ErrorKind::invalid_input, "scenario has no states");
  double p1 = 0, p0 = 0, total_p = 0;
  double end1 = 0, s0_1 = 0, s0_0 = 0, s1_1 = 0;
  for (const auto& s : states) {
    require(s.policy == 0.0 || s.policy == 1.0, ErrorKind::unsupported_scenario,
            "bias decomposition needs a binary policy");
    require(std::isfinite(s.error) && std::isfinite(s.weight_untreated) && std::isfinite(s.weight_treated),
            ErrorKind::invalid_input, "state has non-finite entries");
    require(std::isfinite(s.prob) && s.prob >= 0.0, ErrorKind::invalid_input, "state probabilities must be >= 0");
    total_p += s.prob;
    if (s.policy == 1.0) {
      p1 += s.prob;
      end1 += s.prob * (s.weight_treated - s.weight_untreated) * s.error;
      s0_1 += s.prob * s.weight_untreated * s.error;
      s1_1 += s.prob * s.weight_treated * s.error;
    } else {
      p0 += s.prob;
      s0_0 += s.prob * s.weight_untreated * s.error;
    }
  }
  require(std::abs(total_p - 1.0) <= 1e-12, ErrorKind::invalid_input, "state probabilities must sum to 1");
  require(p1 > 0.0 && p0 > 0.0, ErrorKind::degenerate_scenario, "both policy values need positive probability");
  BiasDecomposition out;
  out.endogenous = end1 / p1;
  out.statistical = s0_1 / p1 - s0_0 / p0;
  out.total = s1_1 / p1 - s0_0 / p0;
  return out;
}

}  // namespace mdest
