#include "mdest/linalg.hpp"

#include <cmath>
#include <limits>

namespace mdest::linalg {

bool all_finite(const Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j))) return false;
  return true;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

bool is_nonsingular(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (tol == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    return lu.nonzeroPivots() == m.rows();
  }
  const Eigen::VectorXd sv = singular_values(m);
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  return smax > 0.0 && smin > tol * smax;
}

Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& gamma) {
  const Eigen::Index k = gamma.rows();
  const Eigen::Index q = gamma.cols();
  if (q == 0) return Eigen::MatrixXd::Identity(k, k);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gamma);
  Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
  Eigen::MatrixXd out = full.rightCols(k - q);
  // sign convention: largest entry of each column positive
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    Eigen::Index i = 0;
    out.col(j).cwiseAbs().maxCoeff(&i);
    if (out(i, j) < 0.0) out.col(j) *= -1.0;
  }
  return out;
}

Eigen::MatrixXd range_basis(const Eigen::MatrixXd& gamma) {
  const Eigen::Index k = gamma.rows();
  const Eigen::Index q = gamma.cols();
  if (q == 0) return Eigen::MatrixXd(k, 0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gamma);
  Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
  return full.leftCols(q);
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_abs_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_positive_definite(const Eigen::MatrixXd& sym, double rel_tol) {
  if (sym.rows() == 0) return true;
  if (!all_finite(sym)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  return top > 0.0 && ev(0) > rel_tol * top;
}

Eigen::MatrixXd pinv_symmetric(const Eigen::MatrixXd& sym, double rel_tol, Eigen::Index* rank) {
  const Eigen::Index n = sym.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index r = 0;
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const auto& ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (top > 0.0 && ev(i) > rel_tol * top) {
        const Eigen::VectorXd v = es.eigenvectors().col(i);
        out.noalias() += (v * v.transpose()) / ev(i);
        ++r;
      }
    }
  }
  if (rank) *rank = r;
  return out;
}

}  // namespace mdest::linalg
