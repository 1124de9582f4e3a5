#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "momsplit/algorithm.hpp"
#include "momsplit/operators.hpp"
#include "momsplit/solvers.hpp"

namespace momsplit {

/// Reference zero and constants for evaluating the Lyapunov sequences.
///
/// `B` should be an uncounted copy of the problem's B so that monitoring does
/// not disturb the per-iteration evaluation budget. L_k for negative k is L_0.
struct CertContext {
  Vector x_star;
  SingleValuedOp B;
  Metric metric = Metric::identity(0);
  double mu = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double L = 0.0;
  /// Optional per-iteration overrides (Algorithm 1 schedules).
  std::function<double(std::size_t)> gamma_at;
  std::function<double(std::size_t)> L_at;
  std::optional<double> eps2, eps5, eps6, alpha;

  double gamma_of(long k) const;
  double L_of(long k) const;
};

/// Psi_k(x*) for Algorithm 1 at state k.
double psi(const CertContext& ctx, const SolverState& s);
/// Xi_k(x*) for Algorithm 2 (needs eps2).
double xi(const CertContext& ctx, const SolverState& s);
/// Gamma_k(x*), the part of Xi_k without the quadratic weights.
double gamma_cert(const CertContext& ctx, const SolverState& s);
/// S_k(x*) for Algorithm 3 (needs eps5, eps6, alpha; throws PreconditionError
/// unless 1 - (1 + eps6) gamma^2 mu^2 > 0).
double s_cert(const CertContext& ctx, const SolverState& s);

/// (1 - L_{k-1} - gamma_k mu) ||x_k - x*||_S^2.
double psi_lower_bound(const CertContext& ctx, const SolverState& s);
/// (1 - L_{k-1} - gamma mu) ||x_k - x*||^2 + (1 + gamma beta/eps2 - L_{k-2} + (sqrt2 - 1) gamma mu) ||x_k - x_{k-1}||^2.
double xi_lower_bound(const CertContext& ctx, const SolverState& s);

/// Guaranteed drop V_k - V_{k+1} for the step before -> after.
double psi_required_drop(const CertContext& ctx, const SolverState& before, const SolverState& after);
double xi_required_drop(const CertContext& ctx, const SolverState& before, const SolverState& after);
double s_required_drop(const CertContext& ctx, const SolverState& before, const SolverState& after);

/// True iff ||x - J_{gamma A}(x - gamma (B + C) x)|| <= tol.
bool verify_zero(const OperatorTriple& t, const Vector& x, double tol, double gamma_ref = 1.0);

enum class CertKind { kPsi, kXi, kS };
/// Certificate matching an algorithm; FBHF and four-op have none.
CertKind certificate_for(Algorithm a);

struct CertStep {
  std::size_t k = 0;
  double before = 0.0;
  double after = 0.0;
  double required_drop = 0.0;
  /// before - required_drop - after; must be >= -1e-9 (1 + |before|).
  double slack = 0.0;
  std::optional<double> lower_bound;
  bool decrease_ok = true;
  bool lower_ok = true;
};

/// Records the certificate along a run through SolverConfig::observer.
class CertificateMonitor {
 public:
  CertificateMonitor(CertKind kind, CertContext ctx);

  Observer observer() const;
  double value(const SolverState& s) const;
  const std::vector<CertStep>& steps() const { return data_->steps; }
  bool all_ok() const;
  /// First step violating the decrease or lower bound.
  std::optional<CertStep> first_violation() const;

 private:
  struct Data {
    CertKind kind;
    CertContext ctx;
    std::vector<CertStep> steps;
  };
  std::shared_ptr<Data> data_;
};

/// V / (k_const (1 + t)^(k - 1)).
double rlinear_bound(double V1, double k_const, double t, std::size_t k);

/// The rate potential of the Algorithm 3 linear-rate argument:
/// (1 + t gamma mu (1 + gamma mu)) ||x_k - x*||^2 + d_k + (A_rate + alpha)/(1 + t) ||x_k - x_{k-1}||^2.
double alg3_rate_potential(const CertContext& ctx, const SolverState& s, double t, double a_rate);

/// Runs `config` with a tighter tolerance (10x smaller, 10x iteration cap)
/// and returns the final iterate.
Vector over_solve(SolverConfig config, const OperatorTriple& t, const Vector& x0, const Vector& u0 = Vector());

}  // namespace momsplit
