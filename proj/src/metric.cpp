#include "momsplit/metric.hpp"

#include <cmath>
#include <memory>
#include <string>

namespace momsplit {

namespace {

void check_dim(const Metric& m, const Vector& v, const char* where) {
  if (v.size() != m.dim()) {
    throw ArgumentError(std::string(where) + ": vector dimension " + std::to_string(v.size()) +
                        " does not match metric dimension " + std::to_string(m.dim()));
  }
}

double checked_quadratic_form(double q, const char* which) {
  if (!(q >= 0.0)) {
    throw MetricContractError(std::string(which) +
                              ": negative quadratic form; metric is not positive definite");
  }
  return q;
}

}  // namespace

Metric::Metric(Index dim, LinearMap apply, LinearMap apply_inv, double strong_monotonicity_c)
    : dim_(dim), apply_(std::move(apply)), apply_inv_(std::move(apply_inv)), c_(strong_monotonicity_c) {
  if (dim < 0) throw ArgumentError("Metric: negative dimension");
  if (!apply_ || !apply_inv_) throw ArgumentError("Metric: apply and apply_inv are required");
  if (!(c_ > 0.0)) throw MetricContractError("Metric: strong monotonicity constant must be > 0");
}

Metric Metric::identity(Index dim) {
  Metric m(
      dim, [](const Vector& v) { return v; }, [](const Vector& v) { return v; }, 1.0);
  m.kind_ = Kind::kIdentity;
  m.diag_ = Vector::Ones(dim);
  return m;
}

Metric Metric::diagonal(const Vector& d) {
  if (d.size() == 0) throw ArgumentError("Metric::diagonal: empty diagonal");
  if (!d.allFinite() || d.minCoeff() <= 0.0) {
    throw MetricContractError("Metric::diagonal: entries must be finite and positive");
  }
  Vector inv = d.cwiseInverse();
  Metric m(
      d.size(), [d](const Vector& v) -> Vector { return d.cwiseProduct(v); },
      [inv](const Vector& v) -> Vector { return inv.cwiseProduct(v); }, d.minCoeff());
  m.kind_ = Kind::kDiagonal;
  m.diag_ = d;
  return m;
}

Metric Metric::dense(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() == 0) throw ArgumentError("Metric::dense: matrix must be square");
  if (!s.isApprox(s.transpose(), 1e-12)) throw MetricContractError("Metric::dense: matrix is not symmetric");
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(s);
  if (llt->info() != Eigen::Success) {
    throw MetricContractError("Metric::dense: matrix is not positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
  const double c = eig.eigenvalues().minCoeff();
  if (!(c > 0.0)) throw MetricContractError("Metric::dense: matrix is not positive definite");
  auto mat = std::make_shared<const Matrix>(s);
  return Metric(
      s.rows(), [mat](const Vector& v) -> Vector { return (*mat) * v; },
      [llt](const Vector& v) -> Vector { return llt->solve(v); }, c);
}

Vector Metric::apply(const Vector& v) const {
  check_dim(*this, v, "Metric::apply");
  if (kind_ == Kind::kIdentity) return v;
  return apply_(v);
}

Vector Metric::apply_inv(const Vector& v) const {
  check_dim(*this, v, "Metric::apply_inv");
  if (kind_ == Kind::kIdentity) return v;
  return apply_inv_(v);
}

double s_inner(const Metric& m, const Vector& u, const Vector& v) {
  check_dim(m, u, "s_inner");
  check_dim(m, v, "s_inner");
  if (m.is_identity()) return u.dot(v);
  return m.apply(u).dot(v);
}

double s_norm_sq(const Metric& m, const Vector& v) {
  check_dim(m, v, "s_norm");
  if (m.is_identity()) return v.squaredNorm();
  if (const auto& d = m.diagonal_entries()) {
    return checked_quadratic_form(v.cwiseAbs2().dot(*d), "s_norm");
  }
  return checked_quadratic_form(m.apply(v).dot(v), "s_norm");
}

double s_inv_norm_sq(const Metric& m, const Vector& v) {
  check_dim(m, v, "s_inv_norm");
  if (m.is_identity()) return v.squaredNorm();
  if (const auto& d = m.diagonal_entries()) {
    return checked_quadratic_form(v.cwiseAbs2().cwiseQuotient(*d).sum(), "s_inv_norm");
  }
  return checked_quadratic_form(m.apply_inv(v).dot(v), "s_inv_norm");
}

double s_norm(const Metric& m, const Vector& v) { return std::sqrt(s_norm_sq(m, v)); }

double s_inv_norm(const Metric& m, const Vector& v) { return std::sqrt(s_inv_norm_sq(m, v)); }

}  // namespace momsplit
