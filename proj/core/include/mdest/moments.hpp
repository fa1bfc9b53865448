#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mdest {

inline constexpr double default_rank_tol = 1e-10;

/// One unit's contribution to the linear moment h(theta) = h1 - h2 * theta.
class UnitMoment {
 public:
  /// Throws invalid-input when dimensions disagree, k == 0, or an entry is not finite.
  UnitMoment(Eigen::VectorXd h1, Eigen::MatrixXd h2);

  const Eigen::VectorXd& h1() const { return h1_; }
  const Eigen::MatrixXd& h2() const { return h2_; }
  Eigen::Index dim() const { return h1_.size(); }

  /// Both parts multiplied by a nonnegative unit weight.
  UnitMoment scaled(double weight) const;

 private:
  Eigen::VectorXd h1_;
  Eigen::MatrixXd h2_;
};

class GroupSample {
 public:
  GroupSample(std::string group_id, std::vector<UnitMoment> units);

  const std::string& group_id() const { return id_; }
  const std::vector<UnitMoment>& units() const { return units_; }
  std::size_t n() const { return units_.size(); }
  Eigen::Index dim() const { return units_.empty() ? 0 : units_.front().dim(); }

 private:
  std::string id_;
  std::vector<UnitMoment> units_;
};

struct MomentAverages {
  Eigen::VectorXd h1;
  Eigen::MatrixXd h2;
};

/// theta = (delta_delta, tau); x = (1, e), h1 = x * dy, h2 = x x'.
UnitMoment build_did_unit(double delta_y, double e);
/// x = (1, z), y = (1, e); h1 = x * dy, h2 = x y'.
UnitMoment build_iv_unit(double delta_y, double e, double z);

/// Means accumulated in storage order. Throws empty-group for n == 0.
MomentAverages average_moments(const GroupSample& sample);

/// Column-wise accumulation of DiD / IV averages without materialising the units.
/// Produces results bit-identical to building the units and calling average_moments.
MomentAverages did_averages(std::span<const double> delta_y, std::span<const double> e);
MomentAverages iv_averages(std::span<const double> delta_y, std::span<const double> e,
                           std::span<const double> z);

/// Solution of h2 * theta = h1, or nullopt when h2 fails the relative
/// singular-value test. rank_tol == 0 requests the exact-rank test.
std::optional<Eigen::VectorXd> solve_theta(const MomentAverages& avgs, double rank_tol = default_rank_tol);

}  // namespace mdest
