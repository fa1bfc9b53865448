#pragma once

// Shared generators and independent reference solvers for tests and the
// acceptance runner.

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "mdest/error.hpp"
#include "mdest/gmm_estimator.hpp"
#include "mdest/md_estimator.hpp"
#include "mdest/moments.hpp"
#include "mdest/oracle_spec.hpp"

namespace fixtures {

inline Eigen::MatrixXd randn(std::mt19937_64& eng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = n(eng);
  return m;
}

inline int uniform_int(std::mt19937_64& eng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(eng);
}

/// Random second-stage design with k <= kmax, q <= qmax (q < k), 1 <= p <= pmax.
/// Basis is full, a row restriction or a random subspace.
inline mdest::OracleSpec random_spec(std::mt19937_64& eng, int kmax = 4, int qmax = 2, int pmax = 3) {
  for (;;) {
    const Eigen::Index k = uniform_int(eng, 1, kmax);
    const Eigen::Index q = uniform_int(eng, 0, std::min<int>(qmax, static_cast<int>(k) - 1));
    const Eigen::Index p = uniform_int(eng, 1, pmax);
    const Eigen::MatrixXd gamma = randn(eng, k, q);
    std::vector<Eigen::MatrixXd> basis;
    switch (uniform_int(eng, 0, 2)) {
      case 0: basis = mdest::presets::basis_full(k, p); break;
      case 1: basis = mdest::presets::basis_rows(k, p, {static_cast<Eigen::Index>(uniform_int(eng, 0, static_cast<int>(k) - 1))}); break;
      default: {
        const int m = uniform_int(eng, 1, static_cast<int>(k * p));
        for (int j = 0; j < m; ++j) basis.push_back(randn(eng, k, p));
      }
    }
    try {
      return mdest::OracleSpec(k, p, gamma, std::move(basis));
    } catch (const mdest::Error&) {
      // kappa too small or dependent basis; draw again
    }
  }
}

inline std::vector<Eigen::VectorXd> random_policies(std::mt19937_64& eng, std::size_t groups, Eigen::Index p) {
  std::vector<Eigen::VectorXd> out;
  for (std::size_t g = 0; g < groups; ++g) out.push_back(randn(eng, p, 1));
  return out;
}

/// Dense reference for the oracle regression: every lambda_g is an explicit
/// unknown, alpha is parametrised in the complement frame, and the stacked
/// weighted least-squares problem is solved by complete orthogonal decomposition.
struct DenseSolution {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd B;
};

inline DenseSolution dense_oracle(const std::vector<Eigen::VectorXd>& thetas, const std::vector<Eigen::VectorXd>& policies,
                                  const mdest::OracleSpec& spec, const std::vector<Eigen::MatrixXd>& weights = {}) {
  const Eigen::Index k = spec.k(), q = spec.q(), m = spec.m();
  const Eigen::MatrixXd& u = spec.complement();
  const Eigen::Index a = u.cols();
  const Eigen::Index G = static_cast<Eigen::Index>(thetas.size());
  const Eigen::Index cols = a + m + G * q;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(G * k, cols);
  Eigen::VectorXd y(G * k);
  for (Eigen::Index g = 0; g < G; ++g) {
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(k, cols);
    blk.leftCols(a) = u;
    for (Eigen::Index j = 0; j < m; ++j) blk.col(a + j) = spec.basis()[static_cast<std::size_t>(j)] * policies[static_cast<std::size_t>(g)];
    blk.block(0, a + m + g * q, k, q) = spec.gamma();
    Eigen::MatrixXd root = Eigen::MatrixXd::Identity(k, k) * std::sqrt(spec.weight(static_cast<std::size_t>(g)));
    if (!weights.empty()) {
      Eigen::LLT<Eigen::MatrixXd> llt(weights[static_cast<std::size_t>(g)]);
      root = llt.matrixU();
    }
    x.middleRows(g * k, k) = root * blk;
    y.segment(g * k, k) = root * thetas[static_cast<std::size_t>(g)];
  }
  const Eigen::VectorXd sol = x.completeOrthogonalDecomposition().solve(y);
  DenseSolution out;
  out.alpha = u * sol.head(a);
  out.B = Eigen::MatrixXd::Zero(k, spec.p());
  for (Eigen::Index j = 0; j < m; ++j) out.B += sol(a + j) * spec.basis()[static_cast<std::size_t>(j)];
  return out;
}

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace fixtures
