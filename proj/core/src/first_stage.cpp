#include "mdest/first_stage.hpp"

#include <cmath>

#include "mdest/error.hpp"
#include "mdest/linalg.hpp"

namespace mdest {

AuxiliaryDesign::AuxiliaryDesign(Eigen::MatrixXd h2_pop, double rank_tol, AuxiliarySource source)
    : h2_(std::move(h2_pop)), source_(source) {
  require(h2_.rows() >= 1 && h2_.rows() == h2_.cols(), ErrorKind::invalid_auxiliary,
          "auxiliary Jacobian must be square");
  require(linalg::all_finite(h2_), ErrorKind::invalid_auxiliary, "auxiliary Jacobian has non-finite entries");
  require(linalg::is_nonsingular(h2_, rank_tol), ErrorKind::invalid_auxiliary, "auxiliary Jacobian is singular");
}

Eigen::MatrixXd did_population_h2(double pi) {
  require(std::isfinite(pi) && pi > 0.0 && pi < 1.0, ErrorKind::invalid_probability, "pi must lie in (0, 1)");
  Eigen::MatrixXd h(2, 2);
  h << 1.0, pi, pi, pi;
  return h;
}

GroupEstimate estimate_group(std::string group_id, std::size_t n_g, const MomentAverages& avgs, double rank_tol) {
  require(n_g >= 1, ErrorKind::empty_group, "group " + group_id + " has no units");
  GroupEstimate out;
  out.theta_hat = solve_theta(avgs, rank_tol);
  out.group_id = std::move(group_id);
  out.n_g = n_g;
  out.h1_hat = avgs.h1;
  out.h2_hat = avgs.h2;
  return out;
}

GroupEstimate estimate_group(const GroupSample& sample, double rank_tol) {
  return estimate_group(sample.group_id(), sample.n(), average_moments(sample), rank_tol);
}

GroupEstimate estimate_group_alt(std::string group_id, std::size_t n_g, const MomentAverages& avgs,
                                 const AuxiliaryDesign& aux) {
  require(n_g >= 1, ErrorKind::empty_group, "group " + group_id + " has no units");
  require(aux.h2_pop().rows() == avgs.h1.size(), ErrorKind::invalid_auxiliary,
          "auxiliary Jacobian dimension does not match the moments");
  GroupEstimate out;
  out.group_id = std::move(group_id);
  out.n_g = n_g;
  out.h1_hat = avgs.h1;
  out.h2_hat = avgs.h2;
  out.theta_hat = Eigen::VectorXd(Eigen::FullPivLU<Eigen::MatrixXd>(aux.h2_pop()).solve(avgs.h1));
  return out;
}

GroupEstimate estimate_group_alt(const GroupSample& sample, const AuxiliaryDesign& aux) {
  return estimate_group_alt(sample.group_id(), sample.n(), average_moments(sample), aux);
}

double ipw_tau(std::span<const double> delta_y, std::span<const double> e, double pi) {
  require(std::isfinite(pi) && pi > 0.0 && pi < 1.0, ErrorKind::invalid_probability, "pi must lie in (0, 1)");
  require(delta_y.size() == e.size() && !delta_y.empty(), ErrorKind::invalid_input,
          "ipw_tau needs equal-length, non-empty vectors");
  const double denom = pi * (1.0 - pi);
  double acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    require(std::isfinite(delta_y[i]) && (e[i] == 0.0 || e[i] == 1.0), ErrorKind::invalid_input,
            "ipw_tau: bad unit record");
    acc += (e[i] - pi) * delta_y[i] / denom;
  }
  return acc / static_cast<double>(e.size());
}

std::vector<GroupEstimate> estimate_groups(std::span<const GroupSample> samples, double rank_tol) {
  std::vector<GroupEstimate> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(estimate_group(s, rank_tol));
  return out;
}

}  // namespace mdest
