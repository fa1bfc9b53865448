#include <gtest/gtest.h>

#include <random>

#include "mdest/error.hpp"
#include "support/errors.hpp"
#include "mdest/moments.hpp"

using mdest::ErrorKind;

namespace {

Eigen::Matrix2d m2(double a, double b, double c, double d) {
  Eigen::Matrix2d m;
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(DidUnit, ControlUnitZeroesSecondRow) {
  const auto u = mdest::build_did_unit(1.0, 0.0);
  EXPECT_EQ(u.h1(), Eigen::Vector2d(1.0, 0.0));
  EXPECT_EQ(u.h2(), m2(1, 0, 0, 0));
}

TEST(DidUnit, TreatedUnitIsOuterProductOfOnes) {
  const auto u = mdest::build_did_unit(3.0, 1.0);
  EXPECT_EQ(u.h1(), Eigen::Vector2d(3.0, 3.0));
  EXPECT_EQ(u.h2(), m2(1, 1, 1, 1));
  const auto v = mdest::build_did_unit(-2.5, 1.0);
  EXPECT_EQ(v.h1(), Eigen::Vector2d(-2.5, -2.5));
  EXPECT_EQ(v.h2(), m2(1, 1, 1, 1));
}

TEST(DidUnit, RejectsNonBinaryOrNonFinite) {
  EXPECT_MDEST_ERROR(mdest::build_did_unit(1.0, 0.5), ErrorKind::invalid_input);
  EXPECT_MDEST_ERROR(mdest::build_did_unit(std::nan(""), 1.0), ErrorKind::invalid_input);
  EXPECT_MDEST_ERROR(mdest::build_did_unit(1.0, INFINITY), ErrorKind::invalid_input);
}

TEST(IvUnit, Examples) {
  auto u = mdest::build_iv_unit(2.0, 1.0, 1.0);
  EXPECT_EQ(u.h1(), Eigen::Vector2d(2, 2));
  EXPECT_EQ(u.h2(), m2(1, 1, 1, 1));
  u = mdest::build_iv_unit(1.0, 0.0, 1.0);
  EXPECT_EQ(u.h1(), Eigen::Vector2d(1, 1));
  EXPECT_EQ(u.h2(), m2(1, 0, 1, 0));
  u = mdest::build_iv_unit(0.0, 1.0, 0.0);
  EXPECT_EQ(u.h1(), Eigen::Vector2d(0, 0));
  EXPECT_EQ(u.h2(), m2(1, 1, 0, 0));
}

TEST(UnitMoment, DimensionChecks) {
  EXPECT_MDEST_ERROR(mdest::UnitMoment(Eigen::Vector2d(1, 2), Eigen::Matrix3d::Identity()), ErrorKind::invalid_input);
  EXPECT_MDEST_ERROR(mdest::UnitMoment(Eigen::VectorXd(), Eigen::MatrixXd()), ErrorKind::invalid_input);
}

TEST(AverageMoments, TwoUnitsHandSum) {
  const mdest::GroupSample s("g", {mdest::build_did_unit(3, 1), mdest::build_did_unit(1, 0)});
  const auto a = mdest::average_moments(s);
  EXPECT_EQ(a.h1, Eigen::Vector2d(2.0, 1.5));
  EXPECT_EQ(a.h2, m2(1, 0.5, 0.5, 0.5));
}

TEST(AverageMoments, SingleUnitAndZeros) {
  const auto u = mdest::build_iv_unit(1.5, 1.0, 0.0);
  const auto a = mdest::average_moments(mdest::GroupSample("g", {u}));
  EXPECT_EQ(a.h1, u.h1());
  EXPECT_EQ(a.h2, u.h2());
  const auto z = mdest::average_moments(
      mdest::GroupSample("g", {mdest::build_did_unit(0, 1), mdest::build_did_unit(0, 0)}));
  EXPECT_TRUE(z.h1.isZero(0.0));
}

TEST(AverageMoments, EmptyGroup) {
  EXPECT_MDEST_ERROR(mdest::average_moments(mdest::GroupSample("g", {})), ErrorKind::empty_group);
}

TEST(AverageMoments, FastPathsAreBitIdentical) {
  std::mt19937_64 eng(7);
  std::normal_distribution<double> n(0.0, 3.0);
  std::bernoulli_distribution b(0.4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> dy, e, z;
    std::vector<mdest::UnitMoment> did, iv;
    for (int i = 0; i < 37 + rep; ++i) {
      dy.push_back(n(eng));
      e.push_back(b(eng) ? 1.0 : 0.0);
      z.push_back(b(eng) ? 1.0 : 0.0);
      did.push_back(mdest::build_did_unit(dy.back(), e.back()));
      iv.push_back(mdest::build_iv_unit(dy.back(), e.back(), z.back()));
    }
    const auto a = mdest::average_moments(mdest::GroupSample("g", did));
    const auto fa = mdest::did_averages(dy, e);
    EXPECT_TRUE((a.h1.array() == fa.h1.array()).all());
    EXPECT_TRUE((a.h2.array() == fa.h2.array()).all());
    const auto c = mdest::average_moments(mdest::GroupSample("g", iv));
    const auto fc = mdest::iv_averages(dy, e, z);
    EXPECT_TRUE((c.h1.array() == fc.h1.array()).all());
    EXPECT_TRUE((c.h2.array() == fc.h2.array()).all());
  }
}

TEST(SolveTheta, ClosedForm) {
  const mdest::MomentAverages a{Eigen::Vector2d(2.0, 1.5), m2(1, 0.5, 0.5, 0.5)};
  const auto t = mdest::solve_theta(a);
  ASSERT_TRUE(t);
  EXPECT_NEAR((*t)(0), 1.0, 1e-14);
  EXPECT_NEAR((*t)(1), 2.0, 1e-14);
}

TEST(SolveTheta, IdentityJacobian) {
  const Eigen::Vector3d v(0.3, -1.0, 7.0);
  const auto t = mdest::solve_theta({v, Eigen::Matrix3d::Identity()});
  ASSERT_TRUE(t);
  EXPECT_EQ(*t, Eigen::VectorXd(v));
}

TEST(SolveTheta, NoTreatedUnitsIsSingular) {
  EXPECT_FALSE(mdest::solve_theta({Eigen::Vector2d(1.0, 0.0), m2(1, 0, 0, 0)}));
  EXPECT_FALSE(mdest::solve_theta({Eigen::Vector2d(1.0, 0.0), m2(1, 0, 0, 0)}, 0.0));
}

TEST(SolveTheta, RelativeThresholdVersusExactRank) {
  const mdest::MomentAverages near{Eigen::Vector2d(1, 1), m2(1, 0, 0, 1e-13)};
  EXPECT_FALSE(mdest::solve_theta(near));
  EXPECT_TRUE(mdest::solve_theta(near, 0.0));
}
