#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "momsplit/algorithm.hpp"
#include "momsplit/conditions.hpp"
#include "momsplit/operators.hpp"

namespace momsplit {

/// Iterates of a run at iteration k plus the forward evaluations the next
/// step reuses.
///
/// Histories start from x_{-1} = x_{-2} = y_{-1} = x_0 and u_{-1} = u_0, so the
/// first reflected and momentum corrections vanish.
struct SolverState {
  Vector x;        // x_k
  Vector x_prev;   // x_{k-1}
  Vector x_prev2;  // x_{k-2}
  Vector u;        // u_k
  Vector u_prev;   // u_{k-1}
  Vector y_prev;   // y_{k-1}
  std::size_t k = 0;

  // Empty until the first step fills them.
  Vector bx_prev;   // B x_{k-1}
  Vector a2x_prev;  // A2 x_{k-1}
  Vector a2y_prev;  // A2 y_{k-1}
  Vector corr_x;    // (gamma M - S) x_k
  double corr_gamma = 0.0;
};

SolverState initial_state(const Vector& x0, const Vector& u0 = Vector());

// Single iterations. The momentum algorithms take the step size from
// kernel.gamma. Baselines use the Euclidean resolvent and need the identity
// metric.

void step_alg1(SolverState& s, const OperatorTriple& p, const Kernel& kernel);
void step_alg2(SolverState& s, const OperatorTriple& p, const Kernel& kernel);
void step_alg3(SolverState& s, const OperatorTriple& p, const Kernel& kernel);

void step_sfrbs(SolverState& s, const OperatorTriple& p, double gamma);
void step_srfbs(SolverState& s, const OperatorTriple& p, double gamma);
void step_orfbs(SolverState& s, const OperatorTriple& p, double gamma);
void step_fbhf(SolverState& s, const OperatorTriple& p, double gamma);

/// SFRBS for A1 + A2 + B + C with A2 handled explicitly. Carries no explicit
/// momentum vector (u stays at its initial value).
void step_four_op_sfrbs(SolverState& s, const FourOperatorSplit& p, double gamma);
/// ORFBS for A1 + A2 + B + C. Stores u_{k+1} = gamma (A2 x_k - A2 y_k), the
/// momentum of Algorithm 3 under the Lipschitz-split kernel.
void step_new_orfbs(SolverState& s, const FourOperatorSplit& p, double gamma);

struct StopRule {
  double rel_change_tol = 1e-6;
  /// Optional extra stop on ||x_{k+1} - x_k||_S.
  std::optional<double> residual_tol;
  std::size_t max_iter = 100000;
};

enum class RunStatus { kConverged, kMaxIter, kDiverged };
std::string_view to_string(RunStatus s);

struct IterationRecord {
  std::size_t k = 0;
  double E = 0.0;
  double step_norm = 0.0;
  std::optional<double> cert;
  std::optional<double> dist;
  double wall_ms = 0.0;
};

struct Trace {
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::kMaxIter;
  std::size_t iterations = 0;
  double time_s = 0.0;
  double final_E = 0.0;
  /// Primary step-size margin when constants were supplied; negative means
  /// the run is outside the convergence theory.
  std::optional<double> condition_margin;
  SolverState final_state;
};

/// Called after each iteration; the returned value fills the `cert` column.
using Observer = std::function<std::optional<double>(const SolverState& before, const SolverState& after)>;

struct SolverConfig {
  Algorithm algorithm = Algorithm::kAlg1;
  double gamma = 0.0;
  /// Algorithm 1 only: gamma_k for k = 0, 1, ... (overrides gamma).
  std::function<double(std::size_t)> gamma_schedule;
  /// Kernel at a given step size; kernel_classic on the problem when unset.
  std::function<Kernel(double)> kernel_factory;
  std::optional<ConstantSet> constants;
  StopRule stop;
  bool record_trace = true;
  std::optional<Vector> known_solution;
  Observer observer;
};

/// Relative change ||z_{k+1} - z_k|| / ||z_k|| (Euclidean); 0/0 is 0 and
/// a nonzero change from the origin is +inf.
double relative_change(const Vector& next, const Vector& cur);

/// Runs any three-operator algorithm from (x0, u0).
Trace run(const SolverConfig& config, const OperatorTriple& problem, const Vector& x0, const Vector& u0 = Vector());
/// Runs four-op or new-orfbs.
Trace run(const SolverConfig& config, const FourOperatorSplit& problem, const Vector& x0);

/// A1 = A, A2 = B/2, B' = B/2 (the split used by the four-operator variants).
FourOperatorSplit split_triple(const OperatorTriple& t);

}  // namespace momsplit
