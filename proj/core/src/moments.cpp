#include "mdest/moments.hpp"

#include <cmath>

#include "mdest/error.hpp"
#include "mdest/linalg.hpp"

namespace mdest {

namespace {

void check_indicator(double e) {
  require(e == 0.0 || e == 1.0, ErrorKind::invalid_input, "indicator e must be 0 or 1");
}

void check_finite(double v, const char* name) {
  require(std::isfinite(v), ErrorKind::invalid_input, std::string(name) + " is not finite");
}

}  // namespace

UnitMoment::UnitMoment(Eigen::VectorXd h1, Eigen::MatrixXd h2) : h1_(std::move(h1)), h2_(std::move(h2)) {
  require(h1_.size() >= 1, ErrorKind::invalid_input, "unit moment needs k >= 1");
  require(h2_.rows() == h1_.size() && h2_.cols() == h1_.size(), ErrorKind::invalid_input,
          "h2 must be k x k with k = len(h1)");
  require(linalg::all_finite(h1_) && linalg::all_finite(h2_), ErrorKind::invalid_input,
          "unit moment has non-finite entries");
}

UnitMoment UnitMoment::scaled(double weight) const {
  require(std::isfinite(weight) && weight >= 0.0, ErrorKind::invalid_input, "unit weight must be finite and >= 0");
  return UnitMoment(h1_ * weight, h2_ * weight);
}

GroupSample::GroupSample(std::string group_id, std::vector<UnitMoment> units)
    : id_(std::move(group_id)), units_(std::move(units)) {
  for (const auto& u : units_)
    require(u.dim() == units_.front().dim(), ErrorKind::invalid_input,
            "group " + id_ + ": units disagree on moment dimension");
}

UnitMoment build_did_unit(double delta_y, double e) {
  check_finite(delta_y, "delta_y");
  check_finite(e, "e");
  check_indicator(e);
  Eigen::Vector2d x(1.0, e);
  return UnitMoment(x * delta_y, x * x.transpose());
}

UnitMoment build_iv_unit(double delta_y, double e, double z) {
  check_finite(delta_y, "delta_y");
  check_finite(e, "e");
  check_finite(z, "z");
  check_indicator(e);
  Eigen::Vector2d x(1.0, z);
  Eigen::Vector2d y(1.0, e);
  return UnitMoment(x * delta_y, x * y.transpose());
}

MomentAverages average_moments(const GroupSample& sample) {
  require(sample.n() >= 1, ErrorKind::empty_group, "group " + sample.group_id() + " has no units");
  const Eigen::Index k = sample.dim();
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(k, k);
  for (const auto& u : sample.units()) {
    s1 += u.h1();
    s2 += u.h2();
  }
  const double n = static_cast<double>(sample.n());
  return {s1 / n, s2 / n};
}

MomentAverages did_averages(std::span<const double> delta_y, std::span<const double> e) {
  require(delta_y.size() == e.size(), ErrorKind::invalid_input, "column lengths differ");
  require(!delta_y.empty(), ErrorKind::empty_group, "group has no units");
  // Same per-entry products and summation order as build_did_unit + average_moments.
  double a0 = 0, a1 = 0, b00 = 0, b01 = 0, b10 = 0, b11 = 0;
  for (std::size_t i = 0; i < delta_y.size(); ++i) {
    const double dy = delta_y[i];
    const double ei = e[i];
    a0 += 1.0 * dy;
    a1 += ei * dy;
    b00 += 1.0;
    b01 += 1.0 * ei;
    b10 += ei * 1.0;
    b11 += ei * ei;
  }
  Eigen::VectorXd s1(2);
  s1 << a0, a1;
  Eigen::MatrixXd s2(2, 2);
  s2 << b00, b01, b10, b11;
  const double n = static_cast<double>(delta_y.size());
  return {s1 / n, s2 / n};
}

MomentAverages iv_averages(std::span<const double> delta_y, std::span<const double> e, std::span<const double> z) {
  require(delta_y.size() == e.size() && e.size() == z.size(), ErrorKind::invalid_input, "column lengths differ");
  require(!delta_y.empty(), ErrorKind::empty_group, "group has no units");
  double a0 = 0, a1 = 0, b00 = 0, b01 = 0, b10 = 0, b11 = 0;
  for (std::size_t i = 0; i < delta_y.size(); ++i) {
    const double dy = delta_y[i];
    const double ei = e[i];
    const double zi = z[i];
    a0 += 1.0 * dy;
    a1 += zi * dy;
    b00 += 1.0;
    b01 += 1.0 * ei;
    b10 += zi * 1.0;
    b11 += zi * ei;
  }
  Eigen::VectorXd s1(2);
  s1 << a0, a1;
  Eigen::MatrixXd s2(2, 2);
  s2 << b00, b01, b10, b11;
  const double n = static_cast<double>(delta_y.size());
  return {s1 / n, s2 / n};
}

std::optional<Eigen::VectorXd> solve_theta(const MomentAverages& avgs, double rank_tol) {
  require(rank_tol >= 0.0 && std::isfinite(rank_tol), ErrorKind::invalid_input, "rank_tol must be >= 0");
  require(avgs.h2.rows() == avgs.h1.size() && avgs.h2.cols() == avgs.h1.size(), ErrorKind::invalid_input,
          "moment averages have inconsistent dimensions");
  require(linalg::all_finite(avgs.h1) && linalg::all_finite(avgs.h2), ErrorKind::invalid_input,
          "moment averages contain non-finite entries");
  if (!linalg::is_nonsingular(avgs.h2, rank_tol)) return std::nullopt;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(avgs.h2);
  return Eigen::VectorXd(lu.solve(avgs.h1));
}

}  // namespace mdest
