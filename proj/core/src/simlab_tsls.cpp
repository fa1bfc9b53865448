#include "mdest/simlab/tsls.hpp"

#include "mdest/error.hpp"
#include "mdest/linalg.hpp"

namespace mdest::sim {

std::optional<Eigen::VectorXd> tsls_group(const GroupSample& sample, double rank_tol) {
  require(sample.dim() == 2, ErrorKind::invalid_input, "group IV needs k = 2 moments");
  return solve_theta(average_moments(sample), rank_tol);
}

namespace {

bool is_effect_row_design(const OracleSpec& spec) {
  if (spec.k() != 2 || spec.q() != 1 || spec.gamma()(1, 0) != 0.0 || spec.gamma()(0, 0) == 0.0) return false;
  const auto reference = presets::basis_rows(2, spec.p(), {1});
  if (reference.size() != spec.basis().size()) return false;
  for (std::size_t j = 0; j < reference.size(); ++j)
    if (reference[j] != spec.basis()[j]) return false;
  return true;
}

}  // namespace

FitResult tsls_pooled(std::span<const MomentAverages> averages, std::span<const std::size_t> group_sizes,
                      std::span<const Eigen::VectorXd> policies, const OracleSpec& spec) {
  require(is_effect_row_design(spec), ErrorKind::invalid_design,
          "pooled TSLS needs k = 2, gamma = e_1 and policies acting on the effect row");
  const std::size_t n_groups = averages.size();
  require(group_sizes.size() == n_groups && policies.size() == n_groups, ErrorKind::invalid_input,
          "averages, group sizes and policies must align");
  require(n_groups > 0, ErrorKind::no_data, "no groups supplied");
  const Eigen::Index p = spec.p();
  const Eigen::Index np = p + 1;

  std::vector<double> cze(n_groups), czy(n_groups), n(n_groups);
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(np, np);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(np);
  Eigen::VectorXd x(np);
  for (std::size_t g = 0; g < n_groups; ++g) {
    const auto& av = averages[g];
    require(av.h1.size() == 2 && av.h2.rows() == 2 && av.h2.cols() == 2, ErrorKind::invalid_input,
            "pooled TSLS needs k = 2 moments");
    require(policies[g].size() == p && linalg::all_finite(policies[g]), ErrorKind::invalid_input, "bad policy vector");
    require(group_sizes[g] >= 1, ErrorKind::empty_group, "group has no units");
    // Within-group covariances from the moment averages: h2 = [[1, E], [Z, ZE]], h1 = [Y, ZY].
    cze[g] = av.h2(1, 1) - av.h2(1, 0) * av.h2(0, 1);
    czy[g] = av.h1(1) - av.h2(1, 0) * av.h1(0);
    n[g] = static_cast<double>(group_sizes[g]);
    x << 1.0, policies[g];
    lhs.noalias() += n[g] * cze[g] * x * x.transpose();
    rhs.noalias() += n[g] * czy[g] * x;
  }
  lhs = (lhs + lhs.transpose()) / 2.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  const Eigen::VectorXd sv = linalg::singular_values(lhs);
  require(sv(0) > 0.0 && sv(np - 1) > 1e-12 * sv(0), ErrorKind::design_deficient,
          "pooled TSLS normal equations are singular");
  const Eigen::VectorXd coef = lu.solve(rhs);
  const Eigen::MatrixXd bread = lu.inverse();

  // Intercept a on the effect row maps to the frame coordinate a * f.
  const Eigen::MatrixXd& frame = spec.complement();
  const double f = frame(1, 0);
  Eigen::VectorXd flip = Eigen::VectorXd::Ones(np);
  flip(0) = f;

  FitResult fit;
  fit.alpha_frame = frame;
  fit.alpha_coords = Eigen::VectorXd::Constant(1, f * coef(0));
  fit.basis_coef = coef.tail(p);
  fit.alpha_hat = frame * fit.alpha_coords;
  fit.B_hat = spec.compose(fit.basis_coef);
  fit.bread = flip.asDiagonal() * bread * flip.asDiagonal();
  fit.n_used = n_groups;
  for (std::size_t g = 0; g < n_groups; ++g) {
    x << 1.0, policies[g];
    const double tau = coef.dot(x);
    const double gap = czy[g] - cze[g] * tau;
    fit.used.push_back(g);
    fit.scores.push_back(flip.asDiagonal() * (n[g] * gap * x));
    fit.lambda_hat.push_back(Eigen::VectorXd::Constant(1, averages[g].h1(0) - tau * averages[g].h2(0, 1)));
    fit.residuals.push_back(Eigen::Vector2d(0.0, gap));
    fit.objective += n[g] * gap * gap;
  }
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(np, np);
  for (const auto& s : fit.scores) meat.noalias() += s * s.transpose();
  fit.vcov = fit.bread * meat * fit.bread.transpose();
  fit.vcov = (fit.vcov + fit.vcov.transpose()) / 2.0;
  return fit;
}

FitResult tsls_pooled(std::span<const GroupSample> samples, std::span<const Eigen::VectorXd> policies,
                      const OracleSpec& spec) {
  std::vector<MomentAverages> avgs;
  std::vector<std::size_t> sizes;
  for (const auto& s : samples) {
    avgs.push_back(average_moments(s));
    sizes.push_back(s.n());
  }
  return tsls_pooled(avgs, sizes, policies, spec);
}

}  // namespace mdest::sim
