#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "mdest/md_estimator.hpp"
#include "mdest/oracle_spec.hpp"

namespace mdest::detail {

/// Normal equations in (alpha coordinates, basis coefficients).
struct ProjectedSystem {
  Eigen::MatrixXd h11, h12, h22;
  Eigen::VectorXd r1, r2;

  ProjectedSystem(Eigen::Index kp, Eigen::Index m)
      : h11(Eigen::MatrixXd::Zero(kp, kp)),
        h12(Eigen::MatrixXd::Zero(kp, m)),
        h22(Eigen::MatrixXd::Zero(m, m)),
        r1(Eigen::VectorXd::Zero(kp)),
        r2(Eigen::VectorXd::Zero(m)) {}
};

struct SchurSolution {
  Eigen::VectorXd alpha_coords;
  Eigen::VectorXd coef;
  Eigen::MatrixXd hessian_inv;
};

/// Eliminates the alpha block, solves the Schur complement for the basis
/// coefficients and back-substitutes. Throws design-deficient on singular blocks.
SchurSolution solve_schur(const ProjectedSystem& sys);

/// Concentrated quadratic for one group: objective x' Q x - 2 x' b with lambda
/// profiled out. Returns false when gamma' A gamma needed a pseudo-inverse.
struct Concentrated {
  Eigen::MatrixXd q;
  Eigen::VectorXd b;
  Eigen::MatrixXd lambda_map;  // lambda = lambda_map * (b_raw - A x)
  bool weak = false;
};
Concentrated concentrate(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// Fit from per-group quadratics (A_g, b_g) over the groups listed in `used`.
/// `raw_residual` maps (group position, fitted x + gamma lambda) to a k-vector residual.
FitResult fit_quadratic(const OracleSpec& spec, std::span<const Eigen::VectorXd> policies,
                        const std::vector<std::size_t>& used, const std::vector<Eigen::MatrixXd>& a,
                        const std::vector<Eigen::VectorXd>& b, std::size_t n_total);

/// Positive total weight. Identification itself is judged on the projected
/// normal equations by solve_schur.
void check_design(const std::vector<double>& weights);

void check_policies(const OracleSpec& spec, std::span<const Eigen::VectorXd> policies, std::size_t n_groups);

Eigen::MatrixXd sandwich(const FitResult& fit, std::span<const std::string> clusters, std::size_t n_total);

}  // namespace mdest::detail
