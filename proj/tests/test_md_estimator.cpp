#include <gtest/gtest.h>

#include <random>

#include "mdest/first_stage.hpp"
#include "mdest/md_estimator.hpp"
#include "support/errors.hpp"
#include "support/fixtures.hpp"

using mdest::ErrorKind;
namespace presets = mdest::presets;

namespace {

std::vector<Eigen::VectorXd> scalars(std::initializer_list<double> v) {
  std::vector<Eigen::VectorXd> out;
  for (double x : v) out.push_back(Eigen::VectorXd::Constant(1, x));
  return out;
}

mdest::OracleSpec scalar_design() { return {1, 1, presets::gamma_none(1), presets::basis_full(1, 1)}; }

}  // namespace

TEST(FitMd, ExactInterpolation) {
  const auto w = scalars({0, 1, 2});
  const auto th = scalars({1, 3, 5});
  const std::vector<int> omega{1, 1, 1};
  const auto fit = mdest::fit_md(th, omega, w, scalar_design());
  EXPECT_NEAR(fit.B_hat(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(fit.alpha_hat(0), 1.0, 1e-14);
  for (const auto& r : fit.residuals) EXPECT_NEAR(r(0), 0.0, 1e-14);
  EXPECT_EQ(fit.n_used, 3u);
  EXPECT_EQ(fit.n_dropped, 0u);
}

TEST(FitMd, CommonShiftWithScalarEffect) {
  const mdest::OracleSpec spec(2, 2, presets::gamma_ones(2), presets::basis_scalar(2));
  std::vector<Eigen::VectorXd> th, w;
  for (double lam : {0.0, 5.0})
    for (Eigen::Vector2d wg : {Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0)}) {
      w.push_back(wg);
      th.push_back(lam * Eigen::Vector2d::Ones() + 3.0 * wg);
    }
  const std::vector<int> omega(4, 1);
  const auto fit = mdest::fit_md(th, omega, w, spec);
  EXPECT_LT((fit.B_hat - 3.0 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(fit.alpha_hat.cwiseAbs().maxCoeff(), 1e-12);
  ASSERT_EQ(fit.lambda_hat.size(), 4u);
  EXPECT_NEAR(fit.lambda_hat[2](0), 5.0, 1e-12);
}

TEST(FitMd, DroppingAConsistentGroupKeepsTheFit) {
  const auto w = scalars({0, 1, 2, 3});
  const auto th = scalars({1, 3, 5, 7});
  const auto all = mdest::fit_md(th, std::vector<int>{1, 1, 1, 1}, w, scalar_design());
  const auto sel = mdest::fit_md(th, std::vector<int>{1, 0, 1, 1}, w, scalar_design());
  EXPECT_NEAR(sel.B_hat(0, 0), all.B_hat(0, 0), 1e-13);
  EXPECT_EQ(sel.n_dropped, 1u);
  EXPECT_EQ(sel.used, (std::vector<std::size_t>{0, 2, 3}));
}

TEST(FitMd, AcceptsGroupEstimates) {
  std::vector<mdest::GroupEstimate> est(3);
  const auto th = scalars({1, 3, 5});
  for (int g = 0; g < 3; ++g) {
    est[g].group_id = "g" + std::to_string(g);
    est[g].theta_hat = th[g];
  }
  est[1].theta_hat.reset();
  const auto fit = mdest::fit_md(est, scalars({0, 1, 2}), scalar_design());
  EXPECT_NEAR(fit.B_hat(0, 0), 2.0, 1e-14);
  EXPECT_EQ(fit.n_dropped, 1u);
}

TEST(FitMd, Errors) {
  const auto w = scalars({0, 1, 2});
  const auto th = scalars({1, 3, 5});
  EXPECT_MDEST_ERROR(mdest::fit_md(th, std::vector<int>{0, 0, 0}, w, scalar_design()), ErrorKind::no_data);
  EXPECT_MDEST_ERROR(mdest::fit_md(th, std::vector<int>{1, 1, 1}, scalars({1, 1, 1}), scalar_design()),
                     ErrorKind::design_deficient);
  EXPECT_MDEST_ERROR(mdest::fit_md(th, std::vector<int>{1, 1}, w, scalar_design()), ErrorKind::invalid_input);
  EXPECT_MDEST_ERROR(mdest::fit_md(th, std::vector<int>{1, 2, 1}, w, scalar_design()), ErrorKind::invalid_input);
}

TEST(Sandwich, ZeroResidualsGiveZeroVariance) {
  const auto fit = mdest::fit_md(scalars({1, 3, 5}), std::vector<int>{1, 1, 1}, scalars({0, 1, 2}), scalar_design());
  EXPECT_LT(fit.vcov.cwiseAbs().maxCoeff(), 1e-26);
}

TEST(Sandwich, MatchesClassicalHc0) {
  // theta = 0.1, 1.3, 1.9 on W = 0, 1, 2; HC0 from a direct hand computation.
  const auto fit = mdest::fit_md(scalars({0.1, 1.3, 1.9}), std::vector<int>{1, 1, 1}, scalars({0, 1, 2}), scalar_design());
  EXPECT_NEAR(fit.alpha_hat(0), 0.2, 1e-14);
  EXPECT_NEAR(fit.B_hat(0, 0), 0.9, 1e-14);
  Eigen::Matrix2d hc0;
  hc0 << 7.0 / 600.0, -1.0 / 200.0, -1.0 / 200.0, 1.0 / 200.0;
  EXPECT_LT((fit.vcov - hc0).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(fit.se_basis()(0), std::sqrt(1.0 / 200.0), 1e-15);
}

TEST(Sandwich, DuplicatingGroupsHalvesVariance) {
  std::mt19937_64 eng(21);
  const auto spec = fixtures::random_spec(eng, 3, 1, 2);
  const auto w = fixtures::random_policies(eng, 25, spec.p());
  std::vector<Eigen::VectorXd> th;
  for (std::size_t g = 0; g < w.size(); ++g) th.push_back(fixtures::randn(eng, spec.k(), 1));
  auto w2 = w, th2 = th;
  w2.insert(w2.end(), w.begin(), w.end());
  th2.insert(th2.end(), th.begin(), th.end());
  const auto a = mdest::fit_md(th, std::vector<int>(w.size(), 1), w, spec);
  const auto b = mdest::fit_md(th2, std::vector<int>(w2.size(), 1), w2, spec);
  EXPECT_LT((b.vcov - 0.5 * a.vcov).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + a.vcov.cwiseAbs().maxCoeff()));
}

TEST(Sandwich, SingletonClustersEqualEhw) {
  std::mt19937_64 eng(22);
  const auto spec = fixtures::random_spec(eng);
  const auto w = fixtures::random_policies(eng, 30, spec.p());
  std::vector<Eigen::VectorXd> th;
  std::vector<std::string> ids;
  for (std::size_t g = 0; g < w.size(); ++g) {
    th.push_back(fixtures::randn(eng, spec.k(), 1));
    ids.push_back("c" + std::to_string(g));
  }
  const auto fit = mdest::fit_md(th, std::vector<int>(w.size(), 1), w, spec);
  EXPECT_LT((mdest::ehw_vcov(fit, w, spec) - fit.vcov).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((mdest::ehw_vcov(fit, w, spec, ids) - fit.vcov).cwiseAbs().maxCoeff(), 1e-14);
  std::vector<std::string> one(w.size(), "all");
  EXPECT_LT(mdest::ehw_vcov(fit, w, spec, one).cwiseAbs().maxCoeff(), 1e-20);
}

TEST(FitMd, MatchesDenseReference) {
  std::mt19937_64 eng(2024);
  for (int rep = 0; rep < 30; ++rep) {
    const auto spec = fixtures::random_spec(eng);
    const std::size_t groups = 20 + static_cast<std::size_t>(fixtures::uniform_int(eng, 0, 20));
    const auto w = fixtures::random_policies(eng, groups, spec.p());
    std::vector<Eigen::VectorXd> th;
    for (std::size_t g = 0; g < groups; ++g) th.push_back(fixtures::randn(eng, spec.k(), 1));
    const auto fit = mdest::fit_md(th, std::vector<int>(groups, 1), w, spec);
    const auto ref = fixtures::dense_oracle(th, w, spec);
    EXPECT_LT(fixtures::max_abs_diff(fit.B_hat, ref.B), 1e-8) << "rep " << rep;
    EXPECT_LT(fixtures::max_abs_diff(fit.alpha_hat, ref.alpha), 1e-8) << "rep " << rep;
  }
}

TEST(FitMd, GroupWeightsMatchDenseReference) {
  std::mt19937_64 eng(77);
  for (int rep = 0; rep < 10; ++rep) {
    const auto base = fixtures::random_spec(eng);
    const std::size_t groups = 25;
    std::vector<double> gw;
    for (std::size_t g = 0; g < groups; ++g) gw.push_back(1.0 + fixtures::uniform_int(eng, 0, 9));
    const auto spec = base.with_weights(gw);
    const auto w = fixtures::random_policies(eng, groups, spec.p());
    std::vector<Eigen::VectorXd> th;
    for (std::size_t g = 0; g < groups; ++g) th.push_back(fixtures::randn(eng, spec.k(), 1));
    const auto fit = mdest::fit_md(th, std::vector<int>(groups, 1), w, spec);
    const auto ref = fixtures::dense_oracle(th, w, spec);
    EXPECT_LT(fixtures::max_abs_diff(fit.B_hat, ref.B), 1e-8);
  }
}

TEST(FitMdWeighted, IdentityWeightsReduceToScalarPath) {
  std::mt19937_64 eng(31);
  const auto spec = fixtures::random_spec(eng);
  const std::size_t groups = 30;
  const auto w = fixtures::random_policies(eng, groups, spec.p());
  std::vector<mdest::GroupEstimate> est(groups);
  std::vector<Eigen::MatrixXd> ident(groups, Eigen::MatrixXd::Identity(spec.k(), spec.k()));
  for (std::size_t g = 0; g < groups; ++g) est[g].theta_hat = fixtures::randn(eng, spec.k(), 1);
  const auto a = mdest::fit_md(est, w, spec);
  const auto b = mdest::fit_md_weighted(est, w, spec, ident);
  EXPECT_LT(fixtures::max_abs_diff(a.B_hat, b.B_hat), 1e-10);
  EXPECT_LT(fixtures::max_abs_diff(a.alpha_hat, b.alpha_hat), 1e-10);
  EXPECT_LT(fixtures::max_abs_diff(a.vcov, b.vcov), 1e-10);
}

TEST(FitMdWeighted, MatchesDenseReferenceWithMatrixWeights) {
  std::mt19937_64 eng(32);
  for (int rep = 0; rep < 10; ++rep) {
    const auto spec = fixtures::random_spec(eng);
    const std::size_t groups = 30;
    const auto w = fixtures::random_policies(eng, groups, spec.p());
    std::vector<mdest::GroupEstimate> est(groups);
    std::vector<Eigen::VectorXd> th;
    std::vector<Eigen::MatrixXd> a;
    for (std::size_t g = 0; g < groups; ++g) {
      th.push_back(fixtures::randn(eng, spec.k(), 1));
      est[g].theta_hat = th.back();
      const Eigen::MatrixXd l = fixtures::randn(eng, spec.k(), spec.k());
      a.push_back(l * l.transpose() + 0.1 * Eigen::MatrixXd::Identity(spec.k(), spec.k()));
    }
    const auto fit = mdest::fit_md_weighted(est, w, spec, a);
    const auto ref = fixtures::dense_oracle(th, w, spec, a);
    EXPECT_LT(fixtures::max_abs_diff(fit.B_hat, ref.B), 1e-8) << "rep " << rep;
    EXPECT_LT(fixtures::max_abs_diff(fit.alpha_hat, ref.alpha), 1e-8) << "rep " << rep;
  }
}
