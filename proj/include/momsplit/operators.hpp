#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <utility>

#include "momsplit/metric.hpp"
#include "momsplit/types.hpp"

namespace momsplit {

using VectorMap = std::function<Vector(const Vector&)>;

/// A maximally monotone operator A, accessed only through its resolvent.
struct Resolvent {
  /// J_{gamma A}(z) = (Id + gamma A)^-1 z.
  std::function<Vector(double gamma, const Vector& z)> eval;
  /// Resolvent in a diagonal metric: the x with 0 in diag(s)(x - z)/gamma + A x.
  /// Only set for operators that are separable across coordinates.
  std::function<Vector(double gamma, const Vector& s_diag, const Vector& z)> eval_diag;

  Vector operator()(double gamma, const Vector& z) const;

  /// Normal cone of [lo, hi]^n.
  static Resolvent box(double lo, double hi);
  /// Normal cone of the nonnegative orthant.
  static Resolvent nonneg();
  /// Normal cone of {x : sum x = 1, 0 <= x <= 1}.
  static Resolvent capped_simplex();
  /// A = 0.
  static Resolvent zero();
  /// A_first x A_second on a concatenated vector split at `split`.
  static Resolvent product(Resolvent first, Index split, Resolvent second);
  /// A + rho*S for diagonal S (rho*Id for the Euclidean resolvent).
  static Resolvent shifted(Resolvent base, double rho);
};

/// Single-valued operator with the constants the step-size conditions need.
struct SingleValuedOp {
  VectorMap eval;
  /// Lipschitz constant w.r.t. S: ||Tx - Ty||_{S^-1} <= mu ||x - y||_S.
  double lipschitz_mu = 0.0;
  /// <Tx - Ty, x - y> >= ||Tx - Ty||^2_{S^-1} / beta.
  std::optional<double> cocoercivity_beta;
  /// <Tx - Ty, x - y> >= rho ||x - y||_S^2.
  std::optional<double> strong_rho;

  Vector operator()(const Vector& x) const { return eval(x); }

  static SingleValuedOp zero();
  /// Pointwise scaling: (factor * T), constants scaled accordingly.
  static SingleValuedOp scaled(const SingleValuedOp& op, double factor);
  /// T1 + T2 with Lipschitz constants added (cocoercivity dropped).
  static SingleValuedOp sum(const SingleValuedOp& a, const SingleValuedOp& b);
};

/// Warped-resolvent kernel M with gamma*M - S being L-Lipschitz w.r.t. S.
struct Kernel {
  VectorMap eval_M;
  /// (gamma*M - S)x; the momentum is the difference of this map at two points.
  VectorMap correction;
  /// (M + A)^-1 z.
  VectorMap warped_resolvent;
  double lipschitz_L = 0.0;
  double gamma = 1.0;

  /// User-supplied kernel. `correction` is derived as gamma*M(x) - S x.
  static Kernel custom(const Metric& metric, double gamma, VectorMap eval_M, VectorMap warped_resolvent,
                       double lipschitz_L);
};

/// The inclusion 0 in Ax + Bx + Cx.
struct OperatorTriple {
  Resolvent A;
  SingleValuedOp B;
  SingleValuedOp C;
  Metric metric;
  Index dim = 0;
  /// Primal/dual boundary when the vector is a concatenated (x, u) pair.
  std::optional<Index> split;
};

/// 0 in A1 x + A2 x + B x + C x, with A1 given by its resolvent and A2 Lipschitz.
/// Always in the Euclidean metric.
struct FourOperatorSplit {
  Resolvent A1;
  SingleValuedOp A2;
  SingleValuedOp B;
  SingleValuedOp C;
  Index dim = 0;
  std::optional<Index> split;
};

// Projections (resolvents of indicator subdifferentials).

Vector project_box(const Vector& z, double lo, double hi);
Vector project_nonneg(const Vector& z);
/// Euclidean projection onto {x : sum x = 1, 0 <= x <= 1}.
Vector project_capped_simplex(const Vector& z);

// Building-block operators.

/// (D^T u, -D x - b) for a concatenated z = (x, u).
std::pair<Vector, Vector> skew_saddle(const Matrix& D, const Vector& b, const Vector& x, const Vector& u);
/// G^T (G x - b).
Vector quad_grad(const Matrix& G, const Vector& b, const Vector& x);

struct NormEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Spectral norm of a linear map from the top eigenvalue of apply_adjoint o apply
/// (restarted Lanczos; `iterations` counts Gram applications).
NormEstimate operator_norm(const VectorMap& apply, const VectorMap& apply_adjoint, Index dim, double tol = 1e-8,
                           std::size_t max_iter = 10000);
/// Norm of a linear map as a map from (R^n, ||.||_S) to (R^n, ||.||_{S^-1}).
NormEstimate operator_norm_in_metric(const VectorMap& apply, const VectorMap& apply_adjoint, const Metric& metric,
                                     double tol = 1e-8, std::size_t max_iter = 10000);
/// Convenience overload for dense matrices.
NormEstimate operator_norm(const Matrix& m, double tol = 1e-8, std::size_t max_iter = 10000);

// Kernels.

/// M = S / gamma: gamma*M - S = 0 and the momentum vanishes.
Kernel kernel_classic(const Metric& metric, const Resolvent& A, double gamma);
/// M = Id/gamma - A2 for A = A1 + A2 (Euclidean metric only).
Kernel kernel_lipschitz_split(const Metric& metric, const Resolvent& A1, const SingleValuedOp& A2, double gamma);

// Evaluation counting, used to assert per-iteration operator budgets.

struct EvalCounter {
  std::shared_ptr<std::size_t> count = std::make_shared<std::size_t>(0);
  std::size_t value() const { return *count; }
};

SingleValuedOp counted(const SingleValuedOp& op, const EvalCounter& counter);
Resolvent counted(const Resolvent& r, const EvalCounter& counter);
Kernel counted(const Kernel& k, const EvalCounter& resolvent_counter);

}  // namespace momsplit
