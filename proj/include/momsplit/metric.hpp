#pragma once

#include <functional>
#include <optional>

#include "momsplit/types.hpp"

namespace momsplit {

/// A strongly positive self-adjoint linear map S together with its inverse.
///
/// The metric induces <u, v>_S = <Su, v> and the dual norm ||v||_{S^-1}. All
/// Lipschitz and cocoercivity constants in this library are measured in the
/// pair (||.||_S, ||.||_{S^-1}). Instances are immutable and can be shared
/// across threads.
class Metric {
 public:
  using LinearMap = std::function<Vector(const Vector&)>;

  /// General form: callables for S and S^-1 plus the strong monotonicity
  /// constant c with <Sv, v> >= c ||v||^2.
  Metric(Index dim, LinearMap apply, LinearMap apply_inv, double strong_monotonicity_c);
  /// Identity on R^0; placeholder until a real metric is assigned.
  Metric() : Metric(identity(0)) {}

  static Metric identity(Index dim);
  /// S = diag(d); every entry must be positive.
  static Metric diagonal(const Vector& d);
  /// Dense symmetric positive definite S, factored once (LLT).
  static Metric dense(const Matrix& s);

  Index dim() const noexcept { return dim_; }
  double strong_monotonicity_c() const noexcept { return c_; }
  bool is_identity() const noexcept { return kind_ == Kind::kIdentity; }
  /// Diagonal of S when S is identity or diagonal.
  const std::optional<Vector>& diagonal_entries() const noexcept { return diag_; }

  Vector apply(const Vector& v) const;
  Vector apply_inv(const Vector& v) const;

 private:
  enum class Kind { kIdentity, kDiagonal, kGeneral };

  Index dim_;
  Kind kind_ = Kind::kGeneral;
  LinearMap apply_;
  LinearMap apply_inv_;
  double c_;
  std::optional<Vector> diag_;
};

/// <Su, v>.
double s_inner(const Metric& m, const Vector& u, const Vector& v);
/// sqrt(<Sv, v>).
double s_norm(const Metric& m, const Vector& v);
/// sqrt(<S^-1 v, v>).
double s_inv_norm(const Metric& m, const Vector& v);
/// ||v||_S^2 without the square root.
double s_norm_sq(const Metric& m, const Vector& v);
double s_inv_norm_sq(const Metric& m, const Vector& v);

}  // namespace momsplit
