#pragma once

#include <Eigen/Dense>

namespace mdest::linalg {

bool all_finite(const Eigen::MatrixXd& m);

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& m);

/// True when sigma_min > tol * sigma_max (and sigma_max > 0). With tol == 0 the
/// test is exact: full-pivot elimination must find a nonzero pivot in every step.
bool is_nonsingular(const Eigen::MatrixXd& m, double tol);

/// Orthonormal basis (k x (k-q)) of the orthogonal complement of span(gamma).
Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& gamma);

/// Orthonormal basis (k x q) of span(gamma); gamma must have full column rank.
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& gamma);

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Eigen::VectorXd vec(const Eigen::MatrixXd& m);

/// Smallest eigenvalue of a symmetric matrix (0x0 gives +inf).
double min_eigenvalue(const Eigen::MatrixXd& sym);
double max_abs_eigenvalue(const Eigen::MatrixXd& sym);

/// Symmetric positive definite test relative to the largest eigenvalue.
bool is_positive_definite(const Eigen::MatrixXd& sym, double rel_tol = 1e-12);

/// Moore-Penrose inverse of a symmetric PSD matrix; eigenvalues below
/// rel_tol * max are treated as zero. `rank` receives the numerical rank.
Eigen::MatrixXd pinv_symmetric(const Eigen::MatrixXd& sym, double rel_tol, Eigen::Index* rank = nullptr);

}  // namespace mdest::linalg
