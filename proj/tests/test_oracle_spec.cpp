#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdest/oracle_spec.hpp"
#include "support/errors.hpp"
#include "support/fixtures.hpp"

using mdest::ErrorKind;
namespace presets = mdest::presets;

TEST(GammaProjector, OnesInTwoDimensions) {
  Eigen::Matrix2d expect;
  expect << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LT((mdest::gamma_perp_projector(presets::gamma_ones(2)) - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GammaProjector, EmptyGammaIsIdentity) {
  EXPECT_TRUE(mdest::gamma_perp_projector(presets::gamma_none(3)).isIdentity(0.0));
}

TEST(GammaProjector, FirstUnitVector) {
  const Eigen::MatrixXd p = mdest::gamma_perp_projector(presets::gamma_unit(4, 0));
  Eigen::Vector4d d(0, 1, 1, 1);
  EXPECT_LT((p - Eigen::MatrixXd(d.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Kappa, OnesWithScalarBasis) {
  for (int k = 2; k <= 10; ++k) {
    const mdest::OracleSpec s(k, k, presets::gamma_ones(k), presets::basis_scalar(k));
    EXPECT_NEAR(s.kappa(), std::sqrt((k - 1.0) / k), 1e-12) << "k=" << k;
  }
  EXPECT_NEAR(mdest::OracleSpec(2, 2, presets::gamma_ones(2), presets::basis_scalar(2)).kappa(), 0.70711, 1e-5);
  EXPECT_NEAR(mdest::OracleSpec(5, 5, presets::gamma_ones(5), presets::basis_scalar(5)).kappa(), 0.89443, 1e-5);
}

TEST(Kappa, NoGammaIsOne) {
  std::mt19937_64 eng(3);
  std::vector<Eigen::MatrixXd> basis{fixtures::randn(eng, 3, 2), fixtures::randn(eng, 3, 2)};
  EXPECT_DOUBLE_EQ(mdest::OracleSpec(3, 2, presets::gamma_none(3), basis).kappa(), 1.0);
}

TEST(Kappa, InBounds) {
  std::mt19937_64 eng(11);
  for (int i = 0; i < 50; ++i) {
    const auto s = fixtures::random_spec(eng);
    EXPECT_GT(s.kappa(), 0.0);
    EXPECT_LE(s.kappa(), 1.0 + 1e-12);
  }
}

TEST(OracleSpec, RejectsBadDesigns) {
  EXPECT_MDEST_ERROR(mdest::OracleSpec(2, 1, Eigen::MatrixXd::Identity(2, 2), {}), ErrorKind::invalid_design);
  EXPECT_MDEST_ERROR(mdest::OracleSpec(2, 1, Eigen::MatrixXd::Zero(3, 1), {}), ErrorKind::invalid_design);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 1);
  b(0, 0) = 1.0;
  EXPECT_MDEST_ERROR(mdest::OracleSpec(2, 1, presets::gamma_none(2), {b, 2.0 * b}), ErrorKind::invalid_design);
  // basis entirely inside span(gamma): kappa = 0
  EXPECT_MDEST_ERROR(mdest::OracleSpec(2, 1, presets::gamma_unit(2, 0), {b}), ErrorKind::invalid_design);
  EXPECT_MDEST_ERROR(mdest::OracleSpec(2, 1, presets::gamma_none(2), presets::basis_full(2, 1), {1.0, -1.0}),
                     ErrorKind::invalid_design);
  // rank-deficient gamma
  EXPECT_MDEST_ERROR(mdest::OracleSpec(3, 1, Eigen::MatrixXd::Zero(3, 2), {}), ErrorKind::invalid_design);
}

TEST(OracleSpec, ComposeAndCoordinatesRoundTrip) {
  std::mt19937_64 eng(5);
  for (int i = 0; i < 20; ++i) {
    const auto s = fixtures::random_spec(eng);
    const Eigen::VectorXd c = fixtures::randn(eng, s.m(), 1);
    EXPECT_LT((s.coordinates(s.compose(c)) - c).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(OracleSpec, CoordinatesRejectOutsideSpan) {
  const mdest::OracleSpec s(2, 1, presets::gamma_none(2), presets::basis_rows(2, 1, {1}));
  EXPECT_MDEST_ERROR(s.coordinates(Eigen::Vector2d(1.0, 0.0)), ErrorKind::invalid_input);
}

TEST(OracleSpec, ComplementIsOrthonormalAndSignNormalised) {
  const mdest::OracleSpec s(2, 1, presets::gamma_unit(2, 0), presets::basis_rows(2, 1, {1}));
  EXPECT_NEAR(s.complement()(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(s.complement()(1, 0), 1.0, 1e-15);
  std::mt19937_64 eng(8);
  for (int i = 0; i < 20; ++i) {
    const auto r = fixtures::random_spec(eng);
    const Eigen::MatrixXd& u = r.complement();
    EXPECT_TRUE((u.transpose() * u).isIdentity(1e-12));
    if (r.q() > 0) EXPECT_LT((r.gamma().transpose() * u).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Presets, Shapes) {
  EXPECT_EQ(presets::basis_full(3, 2).size(), 6u);
  EXPECT_EQ(presets::basis_diagonal(4).size(), 4u);
  EXPECT_EQ(presets::basis_scalar(4).size(), 1u);
  EXPECT_EQ(presets::basis_rows(3, 2, {0, 2}).size(), 4u);
  const auto d = presets::effect_row_design(2);
  EXPECT_EQ(d.k(), 2);
  EXPECT_EQ(d.q(), 1);
  EXPECT_EQ(d.m(), 2);
}
