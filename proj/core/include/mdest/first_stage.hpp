#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdest/moments.hpp"

namespace mdest {

struct GroupEstimate {
  std::string group_id;
  std::optional<Eigen::VectorXd> theta_hat;  // present iff the group is selected
  std::size_t n_g = 0;
  Eigen::VectorXd h1_hat;
  Eigen::MatrixXd h2_hat;  // kept for unselected groups too

  int omega() const { return theta_hat ? 1 : 0; }
  bool selected() const { return theta_hat.has_value(); }
};

enum class AuxiliarySource { supplied, modeled };

/// Known population Jacobian for one group.
class AuxiliaryDesign {
 public:
  /// Throws invalid-auxiliary when h2_pop is not square, not finite, or singular at rank_tol.
  explicit AuxiliaryDesign(Eigen::MatrixXd h2_pop, double rank_tol = default_rank_tol,
                           AuxiliarySource source = AuxiliarySource::supplied);

  const Eigen::MatrixXd& h2_pop() const { return h2_; }
  AuxiliarySource source() const { return source_; }

 private:
  Eigen::MatrixXd h2_;
  AuxiliarySource source_;
};

/// Population Jacobian of the DiD moments when P(E = 1) = pi.
Eigen::MatrixXd did_population_h2(double pi);

GroupEstimate estimate_group(const GroupSample& sample, double rank_tol = default_rank_tol);
GroupEstimate estimate_group(std::string group_id, std::size_t n_g, const MomentAverages& avgs,
                             double rank_tol = default_rank_tol);

/// theta_alt = h2_pop^{-1} * mean(h1); always selected.
GroupEstimate estimate_group_alt(const GroupSample& sample, const AuxiliaryDesign& aux);
GroupEstimate estimate_group_alt(std::string group_id, std::size_t n_g, const MomentAverages& avgs,
                                 const AuxiliaryDesign& aux);

/// (1/n) sum (E - pi) dY / (pi (1 - pi)).
double ipw_tau(std::span<const double> delta_y, std::span<const double> e, double pi);

/// Per-group estimates in input order.
std::vector<GroupEstimate> estimate_groups(std::span<const GroupSample> samples, double rank_tol = default_rank_tol);

}  // namespace mdest
