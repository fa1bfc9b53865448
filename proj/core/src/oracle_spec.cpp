#include "mdest/oracle_spec.hpp"

#include <cmath>
#include <string>

#include "mdest/error.hpp"
#include "mdest/linalg.hpp"

namespace mdest {

namespace {

bool full_column_rank(const Eigen::MatrixXd& a) {
  if (a.cols() == 0) return true;
  if (a.cols() > a.rows()) return false;
  const Eigen::VectorXd sv = linalg::singular_values(a);
  return sv(0) > 0.0 && sv(sv.size() - 1) > 1e-12 * sv(0);
}

}  // namespace

Eigen::MatrixXd gamma_perp_projector(const Eigen::MatrixXd& gamma) {
  const Eigen::Index k = gamma.rows();
  require(k >= 1, ErrorKind::invalid_design, "gamma needs k >= 1 rows");
  require(linalg::all_finite(gamma), ErrorKind::invalid_design, "gamma has non-finite entries");
  require(full_column_rank(gamma), ErrorKind::invalid_design, "gamma is rank deficient");
  const Eigen::MatrixXd r = linalg::range_basis(gamma);
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(k, k) - r * r.transpose();
  return (p + p.transpose()) / 2.0;
}

OracleSpec::OracleSpec(Eigen::Index k, Eigen::Index p, Eigen::MatrixXd gamma, std::vector<Eigen::MatrixXd> basis,
                       std::vector<double> group_weights)
    : k_(k), p_(p), gamma_(std::move(gamma)), basis_(std::move(basis)), weights_(std::move(group_weights)) {
  require(k_ >= 1, ErrorKind::invalid_design, "moment dimension k must be >= 1");
  require(p_ >= 0, ErrorKind::invalid_design, "policy dimension must be >= 0");
  require(gamma_.rows() == k_, ErrorKind::invalid_design, "gamma must have k rows");
  require(gamma_.cols() < k_, ErrorKind::invalid_design, "gamma with q = k leaves no identifying variation");
  proj_ = gamma_perp_projector(gamma_);
  frame_ = linalg::complement_basis(gamma_);

  vec_basis_.resize(k_ * p_, m());
  for (Eigen::Index j = 0; j < m(); ++j) {
    const auto& b = basis_[static_cast<std::size_t>(j)];
    require(b.rows() == k_ && b.cols() == p_, ErrorKind::invalid_design,
            "basis element " + std::to_string(j) + " is not k x p");
    require(linalg::all_finite(b), ErrorKind::invalid_design, "basis has non-finite entries");
    vec_basis_.col(j) = linalg::vec(b);
  }
  require(full_column_rank(vec_basis_) && (m() == 0 || vec_basis_.norm() > 0.0), ErrorKind::invalid_design,
          "basis elements are linearly dependent");
  for (double w : weights_)
    require(std::isfinite(w) && w >= 0.0, ErrorKind::invalid_design, "group weights must be finite and >= 0");

  kappa_ = 1.0;
  if (m() > 0 && q() > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(vec_basis_);
    const Eigen::MatrixXd ortho =
        (qr.householderQ() * Eigen::MatrixXd::Identity(k_ * p_, m()));
    const Eigen::MatrixXd map = linalg::kron(Eigen::MatrixXd::Identity(p_, p_), proj_) * ortho;
    const Eigen::VectorXd sv = linalg::singular_values(map);
    kappa_ = std::min(1.0, sv(sv.size() - 1));
  }
  require(kappa_ > 1e-12, ErrorKind::invalid_design, "the projected policy subspace is degenerate (kappa = 0)");
}

OracleSpec OracleSpec::with_weights(std::vector<double> group_weights) const {
  return OracleSpec(k_, p_, gamma_, basis_, std::move(group_weights));
}

Eigen::MatrixXd OracleSpec::compose(const Eigen::VectorXd& coef) const {
  require(coef.size() == m(), ErrorKind::invalid_input, "coefficient count does not match the basis");
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k_, p_);
  for (Eigen::Index j = 0; j < m(); ++j) b += coef(j) * basis_[static_cast<std::size_t>(j)];
  return b;
}

Eigen::VectorXd OracleSpec::coordinates(const Eigen::MatrixXd& B) const {
  require(B.rows() == k_ && B.cols() == p_, ErrorKind::invalid_input, "matrix is not k x p");
  if (m() == 0) {
    require(B.size() == 0 || B.norm() == 0.0, ErrorKind::invalid_input, "matrix is not in the policy subspace");
    return Eigen::VectorXd();
  }
  const Eigen::VectorXd v = linalg::vec(B);
  const Eigen::VectorXd c = vec_basis_.colPivHouseholderQr().solve(v);
  require((vec_basis_ * c - v).norm() <= 1e-10 * (1.0 + v.norm()), ErrorKind::invalid_input,
          "matrix is not in the policy subspace");
  return c;
}

Eigen::MatrixXd OracleSpec::policy_design(const Eigen::VectorXd& w) const {
  Eigen::MatrixXd d(k_, m());
  for (Eigen::Index j = 0; j < m(); ++j) d.col(j) = basis_[static_cast<std::size_t>(j)] * w;
  return d;
}

double kappa(const OracleSpec& spec) { return spec.kappa(); }

namespace presets {

Eigen::MatrixXd gamma_none(Eigen::Index k) { return Eigen::MatrixXd(k, 0); }

Eigen::MatrixXd gamma_ones(Eigen::Index k) { return Eigen::MatrixXd::Ones(k, 1); }

Eigen::MatrixXd gamma_unit(Eigen::Index k, Eigen::Index j) {
  require(j >= 0 && j < k, ErrorKind::invalid_design, "unit direction out of range");
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, 1);
  g(j, 0) = 1.0;
  return g;
}

std::vector<Eigen::MatrixXd> basis_full(Eigen::Index k, Eigen::Index p) {
  std::vector<Eigen::MatrixXd> out;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < k; ++i) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, p);
      b(i, j) = 1.0;
      out.push_back(std::move(b));
    }
  return out;
}

std::vector<Eigen::MatrixXd> basis_scalar(Eigen::Index k) { return {Eigen::MatrixXd::Identity(k, k)}; }

std::vector<Eigen::MatrixXd> basis_diagonal(Eigen::Index k) {
  std::vector<Eigen::MatrixXd> out;
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k);
    b(i, i) = 1.0;
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Eigen::MatrixXd> basis_rows(Eigen::Index k, Eigen::Index p, const std::vector<Eigen::Index>& rows) {
  std::vector<Eigen::MatrixXd> out;
  for (Eigen::Index r : rows) require(r >= 0 && r < k, ErrorKind::invalid_design, "basis row out of range");
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index r : rows) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, p);
      b(r, j) = 1.0;
      out.push_back(std::move(b));
    }
  return out;
}

OracleSpec effect_row_design(Eigen::Index p, std::vector<double> group_weights) {
  return OracleSpec(2, p, gamma_unit(2, 0), basis_rows(2, p, {1}), std::move(group_weights));
}

}  // namespace presets

}  // namespace mdest
