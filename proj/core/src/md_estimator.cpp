#include "mdest/md_estimator.hpp"

#include <cmath>
#include <map>

#include "mdest/error.hpp"
#include "mdest/linalg.hpp"
#include "normal_equations.hpp"

namespace mdest {

Eigen::MatrixXd FitResult::vcov_basis() const {
  const Eigen::Index a = alpha_coords.size();
  const Eigen::Index m = basis_coef.size();
  return vcov.block(a, a, m, m);
}

Eigen::VectorXd FitResult::se_basis() const { return vcov_basis().diagonal().cwiseMax(0.0).cwiseSqrt(); }

Eigen::VectorXd FitResult::se_alpha() const {
  const Eigen::Index a = alpha_coords.size();
  const Eigen::MatrixXd v = alpha_frame * vcov.topLeftCorner(a, a) * alpha_frame.transpose();
  return v.diagonal().cwiseMax(0.0).cwiseSqrt();
}

namespace detail {

SchurSolution solve_schur(const ProjectedSystem& sys) {
  const Eigen::Index ka = sys.h11.rows();
  const Eigen::Index m = sys.h22.rows();
  const Eigen::MatrixXd h11 = (sys.h11 + sys.h11.transpose()) / 2.0;
  require(linalg::is_positive_definite(h11, 1e-12), ErrorKind::design_deficient,
          "intercept block of the normal equations is singular");
  Eigen::LLT<Eigen::MatrixXd> llt(h11);
  const Eigen::MatrixXd h11_inv = llt.solve(Eigen::MatrixXd::Identity(ka, ka));
  const Eigen::MatrixXd e = h11_inv * sys.h12;

  SchurSolution out;
  Eigen::MatrixXd s_inv(m, m);
  if (m > 0) {
    Eigen::MatrixXd s = sys.h22 - sys.h12.transpose() * e;
    s = (s + s.transpose()) / 2.0;
    const double scale = std::max(sys.h22.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    require(linalg::min_eigenvalue(s) > 1e-12 * scale, ErrorKind::design_deficient,
            "policy block is not identified after removing intercepts");
    Eigen::LLT<Eigen::MatrixXd> sllt(s);
    s_inv = sllt.solve(Eigen::MatrixXd::Identity(m, m));
    out.coef = sllt.solve(sys.r2 - e.transpose() * sys.r1);
  } else {
    out.coef = Eigen::VectorXd();
  }
  out.alpha_coords = llt.solve(sys.r1 - sys.h12 * out.coef);

  out.hessian_inv.resize(ka + m, ka + m);
  out.hessian_inv.topLeftCorner(ka, ka) = h11_inv + e * s_inv * e.transpose();
  out.hessian_inv.topRightCorner(ka, m) = -e * s_inv;
  out.hessian_inv.bottomLeftCorner(m, ka) = -s_inv * e.transpose();
  out.hessian_inv.bottomRightCorner(m, m) = s_inv;
  return out;
}

Concentrated concentrate(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Concentrated c;
  const Eigen::Index q = gamma.cols();
  if (q == 0) {
    c.q = a;
    c.b = b;
    c.lambda_map = Eigen::MatrixXd(0, a.rows());
    return c;
  }
  const Eigen::MatrixXd ag = a * gamma;
  Eigen::Index rank = 0;
  const Eigen::MatrixXd g_pinv = linalg::pinv_symmetric(gamma.transpose() * ag, 1e-12, &rank);
  c.weak = rank < q;
  c.lambda_map = g_pinv * gamma.transpose();
  c.q = a - ag * g_pinv * ag.transpose();
  c.q = (c.q + c.q.transpose()) / 2.0;
  c.b = b - ag * (c.lambda_map * b);
  return c;
}

void check_policies(const OracleSpec& spec, std::span<const Eigen::VectorXd> policies, std::size_t n_groups) {
  require(policies.size() == n_groups, ErrorKind::invalid_input, "one policy vector per group is required");
  for (const auto& w : policies) {
    require(w.size() == spec.p(), ErrorKind::invalid_input, "policy vector length differs from the design");
    require(linalg::all_finite(w), ErrorKind::invalid_input, "policy vector has non-finite entries");
  }
  require(spec.group_weights().empty() || spec.group_weights().size() == n_groups, ErrorKind::invalid_input,
          "group weight count differs from the group count");
}

void check_design(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  require(total > 0.0, ErrorKind::design_deficient, "the retained groups carry zero total weight");
}

Eigen::MatrixXd sandwich(const FitResult& fit, std::span<const std::string> clusters, std::size_t n_total) {
  const Eigen::Index np = fit.n_params();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(np, np);
  if (clusters.empty()) {
    for (const auto& s : fit.scores) meat.noalias() += s * s.transpose();
  } else {
    require(clusters.size() == n_total, ErrorKind::invalid_input, "one cluster key per group is required");
    std::map<std::string, Eigen::VectorXd> sums;
    for (std::size_t i = 0; i < fit.used.size(); ++i) {
      auto [it, fresh] = sums.try_emplace(clusters[fit.used[i]], Eigen::VectorXd::Zero(np));
      it->second += fit.scores[i];
    }
    for (const auto& [key, s] : sums) meat.noalias() += s * s.transpose();
  }
  Eigen::MatrixXd v = fit.bread * meat * fit.bread.transpose();
  return (v + v.transpose()) / 2.0;
}

FitResult fit_quadratic(const OracleSpec& spec, std::span<const Eigen::VectorXd> policies,
                        const std::vector<std::size_t>& used, const std::vector<Eigen::MatrixXd>& a,
                        const std::vector<Eigen::VectorXd>& b, std::size_t n_total) {
  const Eigen::MatrixXd& u = spec.complement();
  ProjectedSystem sys(u.cols(), spec.m());
  std::vector<Concentrated> conc;
  std::vector<Eigen::MatrixXd> designs;
  conc.reserve(used.size());
  designs.reserve(used.size());
  for (std::size_t i = 0; i < used.size(); ++i) {
    conc.push_back(concentrate(spec.gamma(), a[i], b[i]));
    designs.push_back(spec.policy_design(policies[used[i]]));
    const auto& c = conc.back();
    const auto& d = designs.back();
    const Eigen::MatrixXd qu = c.q * u;
    const Eigen::MatrixXd qd = c.q * d;
    sys.h11.noalias() += u.transpose() * qu;
    sys.h12.noalias() += u.transpose() * qd;
    sys.h22.noalias() += d.transpose() * qd;
    sys.r1.noalias() += u.transpose() * c.b;
    sys.r2.noalias() += d.transpose() * c.b;
  }
  const SchurSolution sol = solve_schur(sys);

  FitResult fit;
  fit.alpha_coords = sol.alpha_coords;
  fit.basis_coef = sol.coef;
  fit.alpha_frame = u;
  fit.alpha_hat = u * sol.alpha_coords;
  fit.B_hat = spec.compose(sol.coef);
  fit.used = used;
  fit.n_used = used.size();
  fit.n_dropped = n_total - used.size();
  fit.bread = sol.hessian_inv;
  for (std::size_t i = 0; i < used.size(); ++i) {
    const auto& c = conc[i];
    const Eigen::VectorXd x = fit.alpha_hat + fit.B_hat * policies[used[i]];
    const Eigen::VectorXd lambda = c.lambda_map * (b[i] - a[i] * x);
    const Eigen::VectorXd full = x + spec.gamma() * lambda;
    const Eigen::VectorXd gap = c.b - c.q * x;
    Eigen::VectorXd s(fit.n_params());
    s << u.transpose() * gap, designs[i].transpose() * gap;
    fit.scores.push_back(std::move(s));
    fit.lambda_hat.push_back(lambda);
    fit.residuals.push_back(full);  // converted by the caller
    fit.objective += full.dot(a[i] * full) - 2.0 * full.dot(b[i]);
    if (c.weak) ++fit.n_weak_lambda;
  }
  fit.vcov = sandwich(fit, {}, n_total);
  return fit;
}

}  // namespace detail

FitResult fit_md(std::span<const Eigen::VectorXd> thetas, std::span<const int> omega,
                 std::span<const Eigen::VectorXd> policies, const OracleSpec& spec) {
  const std::size_t n_groups = thetas.size();
  require(omega.size() == n_groups, ErrorKind::invalid_input, "one selection indicator per group is required");
  detail::check_policies(spec, policies, n_groups);

  std::vector<std::size_t> used;
  std::vector<double> w;
  for (std::size_t g = 0; g < n_groups; ++g) {
    require(omega[g] == 0 || omega[g] == 1, ErrorKind::invalid_input, "selection indicators must be 0 or 1");
    if (omega[g] == 0) continue;
    require(thetas[g].size() == spec.k(), ErrorKind::invalid_input, "theta length differs from the design");
    require(linalg::all_finite(thetas[g]), ErrorKind::invalid_input, "theta has non-finite entries");
    used.push_back(g);
    w.push_back(spec.weight(g));
  }
  require(!used.empty(), ErrorKind::no_data, "no group has an invertible first stage");
  detail::check_design(w);

  const Eigen::Index k = spec.k();
  const Eigen::Index p = spec.p();
  const Eigen::Index m = spec.m();
  const Eigen::MatrixXd& u = spec.complement();
  const Eigen::MatrixXd& proj = spec.projector();

  // Scalar group weights make every block a function of a few weighted sums.
  double sw = 0.0;
  Eigen::VectorXd sw_w = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd sw_ww = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd sw_t = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd sw_tw = Eigen::MatrixXd::Zero(k, p);
  for (std::size_t i = 0; i < used.size(); ++i) {
    const auto& wg = policies[used[i]];
    const auto& th = thetas[used[i]];
    sw += w[i];
    sw_w.noalias() += w[i] * wg;
    sw_ww.noalias() += w[i] * wg * wg.transpose();
    sw_t.noalias() += w[i] * th;
    sw_tw.noalias() += w[i] * th * wg.transpose();
  }

  detail::ProjectedSystem sys(u.cols(), m);
  sys.h11 = sw * Eigen::MatrixXd::Identity(u.cols(), u.cols());
  sys.r1 = u.transpose() * sw_t;
  std::vector<Eigen::MatrixXd> pb;
  for (const auto& bj : spec.basis()) pb.push_back(proj * bj);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& bj = spec.basis()[static_cast<std::size_t>(j)];
    sys.h12.col(j) = u.transpose() * (bj * sw_w);
    sys.r2(j) = pb[static_cast<std::size_t>(j)].cwiseProduct(sw_tw).sum();
    for (Eigen::Index l = 0; l < m; ++l)
      sys.h22(j, l) = (bj.transpose() * pb[static_cast<std::size_t>(l)]).cwiseProduct(sw_ww).sum();
  }
  const detail::SchurSolution sol = detail::solve_schur(sys);

  FitResult fit;
  fit.alpha_coords = sol.alpha_coords;
  fit.basis_coef = sol.coef;
  fit.alpha_frame = u;
  fit.alpha_hat = u * sol.alpha_coords;
  fit.B_hat = spec.compose(sol.coef);
  fit.used = used;
  fit.n_used = used.size();
  fit.n_dropped = n_groups - used.size();
  fit.bread = sol.hessian_inv;

  const Eigen::MatrixXd& gamma = spec.gamma();
  Eigen::LDLT<Eigen::MatrixXd> gram;
  if (spec.q() > 0) gram.compute(gamma.transpose() * gamma);
  for (std::size_t i = 0; i < used.size(); ++i) {
    const auto& wg = policies[used[i]];
    const Eigen::VectorXd d = thetas[used[i]] - fit.alpha_hat - fit.B_hat * wg;
    Eigen::VectorXd lambda = spec.q() > 0 ? Eigen::VectorXd(gram.solve(gamma.transpose() * d)) : Eigen::VectorXd();
    Eigen::VectorXd r = spec.q() > 0 ? Eigen::VectorXd(d - gamma * lambda) : d;
    Eigen::VectorXd s(fit.n_params());
    s << w[i] * (u.transpose() * r), w[i] * (spec.policy_design(wg).transpose() * r);
    fit.objective += w[i] * r.squaredNorm();
    fit.scores.push_back(std::move(s));
    fit.lambda_hat.push_back(std::move(lambda));
    fit.residuals.push_back(std::move(r));
  }
  fit.vcov = detail::sandwich(fit, {}, n_groups);
  return fit;
}

namespace {

void unpack(std::span<const GroupEstimate> estimates, const OracleSpec& spec, std::vector<Eigen::VectorXd>& thetas,
            std::vector<int>& omega) {
  thetas.reserve(estimates.size());
  omega.reserve(estimates.size());
  for (const auto& e : estimates) {
    thetas.push_back(e.theta_hat ? *e.theta_hat : Eigen::VectorXd::Zero(spec.k()));
    omega.push_back(e.omega());
  }
}

}  // namespace

FitResult fit_md(std::span<const GroupEstimate> estimates, std::span<const Eigen::VectorXd> policies,
                 const OracleSpec& spec) {
  std::vector<Eigen::VectorXd> thetas;
  std::vector<int> omega;
  unpack(estimates, spec, thetas, omega);
  return fit_md(thetas, omega, policies, spec);
}

FitResult fit_md_weighted(std::span<const GroupEstimate> estimates, std::span<const Eigen::VectorXd> policies,
                          const OracleSpec& spec, std::span<const Eigen::MatrixXd> weights) {
  const std::size_t n_groups = estimates.size();
  detail::check_policies(spec, policies, n_groups);
  require(weights.size() == n_groups, ErrorKind::invalid_input, "one weight matrix per group is required");
  std::vector<std::size_t> used;
  std::vector<double> scalar_w;
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::VectorXd> b;
  for (std::size_t g = 0; g < n_groups; ++g) {
    const auto& wm = weights[g];
    require(wm.rows() == spec.k() && wm.cols() == spec.k() && linalg::all_finite(wm), ErrorKind::invalid_input,
            "weight matrix must be a finite k x k matrix");
    if (!estimates[g].selected()) continue;
    const auto& th = *estimates[g].theta_hat;
    require(th.size() == spec.k() && linalg::all_finite(th), ErrorKind::invalid_input, "bad theta estimate");
    used.push_back(g);
    scalar_w.push_back(spec.weight(g));
    a.push_back(spec.weight(g) * (wm + wm.transpose()) / 2.0);
    b.push_back(a.back() * th);
  }
  require(!used.empty(), ErrorKind::no_data, "no group has an invertible first stage");
  detail::check_design(scalar_w);
  FitResult fit = detail::fit_quadratic(spec, policies, used, a, b, n_groups);
  fit.objective = 0.0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    fit.residuals[i] = *estimates[used[i]].theta_hat - fit.residuals[i];
    fit.objective += fit.residuals[i].dot(a[i] * fit.residuals[i]);
  }
  return fit;
}

Eigen::MatrixXd ehw_vcov(const FitResult& fit, std::span<const Eigen::VectorXd> policies, const OracleSpec& spec,
                         std::span<const std::string> clusters) {
  const std::size_t n_total = fit.n_used + fit.n_dropped;
  require(policies.size() == n_total, ErrorKind::invalid_input, "policies do not match the fitted groups");
  require(fit.basis_coef.size() == spec.m() && fit.alpha_coords.size() == spec.complement().cols(),
          ErrorKind::invalid_input, "fit does not match the design");
  require(fit.scores.size() == fit.n_used && fit.bread.rows() == fit.n_params(), ErrorKind::invalid_input,
          "fit carries no score contributions");
  return detail::sandwich(fit, clusters, n_total);
}

}  // namespace mdest
