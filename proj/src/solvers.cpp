#include "momsplit/solvers.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <utility>

namespace momsplit {

namespace {

constexpr double kDivergenceNorm = 1e12;

template <typename F>
void guarded(std::size_t k, F&& f) {
  try {
    f();
  } catch (const SolverError&) {
    throw;
  } catch (const std::exception& e) {
    throw SolverError(k, e.what());
  }
}

void require_identity(const Metric& m, const char* where) {
  if (!m.is_identity()) throw UnsupportedConfiguration(std::string(where) + ": requires the identity metric");
}

void require_gamma(double gamma, const char* where) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ArgumentError(std::string(where) + ": gamma must be > 0");
}

/// (gamma M - S) x_k under `kernel`, recomputed when the kernel changed.
const Vector& correction_at_x(SolverState& s, const Kernel& kernel) {
  if (s.corr_x.size() != s.x.size() || s.corr_gamma != kernel.gamma) {
    s.corr_x = kernel.correction(s.x);
    s.corr_gamma = kernel.gamma;
  }
  return s.corr_x;
}

/// M x_k recovered from the cached correction: M x = ((gamma M - S) x + S x) / gamma.
Vector apply_M(const Metric& metric, const Vector& corr_x, const Vector& x, double gamma) {
  return (corr_x + metric.apply(x)) / gamma;
}

void shift_history(SolverState& s, Vector x_next, Vector u_next) {
  s.x_prev2 = std::move(s.x_prev);
  s.x_prev = std::move(s.x);
  s.x = std::move(x_next);
  s.u_prev = std::move(s.u);
  s.u = std::move(u_next);
  ++s.k;
}

}  // namespace

SolverState initial_state(const Vector& x0, const Vector& u0) {
  if (!x0.allFinite()) throw ArgumentError("initial_state: x0 has non-finite entries");
  SolverState s;
  s.x = x0;
  s.x_prev = x0;
  s.x_prev2 = x0;
  s.y_prev = x0;
  if (u0.size() == 0) {
    s.u = Vector::Zero(x0.size());
  } else {
    require_same_size(x0, u0, "initial_state");
    if (!u0.allFinite()) throw ArgumentError("initial_state: u0 has non-finite entries");
    s.u = u0;
  }
  s.u_prev = s.u;
  return s;
}

void step_alg1(SolverState& s, const OperatorTriple& p, const Kernel& kernel) {
  guarded(s.k, [&] {
    const double g = kernel.gamma;
    Vector bx = p.B(s.x);
    const Vector& bxp = s.bx_prev.size() ? s.bx_prev : bx;
    const Vector cx = p.C(s.x);
    const Vector corr_x = correction_at_x(s, kernel);
    const Vector z = apply_M(p.metric, corr_x, s.x, g) - 2.0 * bx + bxp - cx + s.u / g;
    Vector x_next = kernel.warped_resolvent(z);
    Vector corr_next = kernel.correction(x_next);
    Vector u_next = corr_next - corr_x;
    s.bx_prev = std::move(bx);
    s.y_prev = s.x;
    shift_history(s, std::move(x_next), std::move(u_next));
    s.corr_x = std::move(corr_next);
    s.corr_gamma = g;
  });
}

void step_alg2(SolverState& s, const OperatorTriple& p, const Kernel& kernel) {
  guarded(s.k, [&] {
    const double g = kernel.gamma;
    Vector y = 2.0 * s.x - s.x_prev;
    const Vector by = p.B(y);
    const Vector cx = p.C(s.x);
    const Vector corr_x = correction_at_x(s, kernel);
    const Vector z = apply_M(p.metric, corr_x, s.x, g) - by - cx + s.u / g;
    Vector x_next = kernel.warped_resolvent(z);
    Vector corr_next = kernel.correction(x_next);
    Vector u_next = corr_next - corr_x;
    s.y_prev = std::move(y);
    shift_history(s, std::move(x_next), std::move(u_next));
    s.corr_x = std::move(corr_next);
    s.corr_gamma = g;
  });
}

void step_alg3(SolverState& s, const OperatorTriple& p, const Kernel& kernel) {
  guarded(s.k, [&] {
    const double g = kernel.gamma;
    Vector bx = p.B(s.x);
    const Vector& bxp = s.bx_prev.size() ? s.bx_prev : bx;
    const Vector cx = p.C(s.x);
    const Vector corr_x = correction_at_x(s, kernel);
    const Vector z = apply_M(p.metric, corr_x, s.x, g) - bx - cx + s.u / g;
    Vector y = kernel.warped_resolvent(z);
    Vector x_next = y - g * p.metric.apply_inv(bx - bxp);
    Vector u_next = kernel.correction(y) - corr_x;
    s.bx_prev = std::move(bx);
    s.y_prev = std::move(y);
    shift_history(s, std::move(x_next), std::move(u_next));
    s.corr_x.resize(0);
  });
}

void step_sfrbs(SolverState& s, const OperatorTriple& p, double gamma) {
  require_identity(p.metric, "step_sfrbs");
  require_gamma(gamma, "step_sfrbs");
  guarded(s.k, [&] {
    Vector bx = p.B(s.x);
    const Vector& bxp = s.bx_prev.size() ? s.bx_prev : bx;
    const Vector cx = p.C(s.x);
    Vector x_next = p.A(gamma, s.x - 2.0 * gamma * bx + gamma * bxp - gamma * cx);
    s.bx_prev = std::move(bx);
    s.y_prev = s.x;
    Vector u = s.u;
    shift_history(s, std::move(x_next), std::move(u));
  });
}

void step_srfbs(SolverState& s, const OperatorTriple& p, double gamma) {
  require_identity(p.metric, "step_srfbs");
  require_gamma(gamma, "step_srfbs");
  guarded(s.k, [&] {
    Vector y = 2.0 * s.x - s.x_prev;
    const Vector by = p.B(y);
    const Vector cx = p.C(s.x);
    Vector x_next = p.A(gamma, s.x - gamma * by - gamma * cx);
    s.y_prev = std::move(y);
    Vector u = s.u;
    shift_history(s, std::move(x_next), std::move(u));
  });
}

void step_orfbs(SolverState& s, const OperatorTriple& p, double gamma) {
  require_identity(p.metric, "step_orfbs");
  require_gamma(gamma, "step_orfbs");
  guarded(s.k, [&] {
    Vector bx = p.B(s.x);
    const Vector& bxp = s.bx_prev.size() ? s.bx_prev : bx;
    const Vector cx = p.C(s.x);
    Vector y = p.A(gamma, s.x - gamma * bx - gamma * cx);
    Vector x_next = y - gamma * (bx - bxp);
    s.bx_prev = std::move(bx);
    s.y_prev = std::move(y);
    Vector u = s.u;
    shift_history(s, std::move(x_next), std::move(u));
  });
}

void step_fbhf(SolverState& s, const OperatorTriple& p, double gamma) {
  require_identity(p.metric, "step_fbhf");
  require_gamma(gamma, "step_fbhf");
  guarded(s.k, [&] {
    const Vector bx = p.B(s.x);
    const Vector cx = p.C(s.x);
    Vector y = p.A(gamma, s.x - gamma * (bx + cx));
    Vector x_next = y + gamma * (bx - p.B(y));
    s.y_prev = std::move(y);
    Vector u = s.u;
    shift_history(s, std::move(x_next), std::move(u));
  });
}

void step_four_op_sfrbs(SolverState& s, const FourOperatorSplit& p, double gamma) {
  require_gamma(gamma, "step_four_op_sfrbs");
  guarded(s.k, [&] {
    Vector a2x = p.A2(s.x);
    Vector bx = p.B(s.x);
    const Vector& a2xp = s.a2x_prev.size() ? s.a2x_prev : a2x;
    const Vector& bxp = s.bx_prev.size() ? s.bx_prev : bx;
    const Vector cx = p.C(s.x);
    Vector x_next = p.A1(gamma, s.x - 2.0 * gamma * a2x - 2.0 * gamma * bx + gamma * bxp + gamma * a2xp - gamma * cx);
    s.a2x_prev = std::move(a2x);
    s.bx_prev = std::move(bx);
    s.y_prev = s.x;
    Vector u = s.u;
    shift_history(s, std::move(x_next), std::move(u));
  });
}

void step_new_orfbs(SolverState& s, const FourOperatorSplit& p, double gamma) {
  require_gamma(gamma, "step_new_orfbs");
  guarded(s.k, [&] {
    Vector a2x = p.A2(s.x);
    Vector bx = p.B(s.x);
    const Vector& a2xp = s.a2x_prev.size() ? s.a2x_prev : a2x;
    const Vector& a2yp = s.a2y_prev.size() ? s.a2y_prev : a2x;
    const Vector& bxp = s.bx_prev.size() ? s.bx_prev : bx;
    const Vector cx = p.C(s.x);
    Vector y = p.A1(gamma, s.x - gamma * (a2x + bx + cx) - gamma * (a2yp - a2xp));
    Vector x_next = y - gamma * (bx - bxp);
    Vector a2y = p.A2(y);
    Vector u_next = gamma * (a2x - a2y);
    s.a2x_prev = std::move(a2x);
    s.a2y_prev = std::move(a2y);
    s.bx_prev = std::move(bx);
    s.y_prev = std::move(y);
    shift_history(s, std::move(x_next), std::move(u_next));
  });
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged:
      return "converged";
    case RunStatus::kMaxIter:
      return "max-iter";
    case RunStatus::kDiverged:
      return "diverged";
  }
  return "unknown";
}

double relative_change(const Vector& next, const Vector& cur) {
  const double delta = (next - cur).norm();
  const double base = cur.norm();
  if (base == 0.0) return delta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return delta / base;
}

namespace {

template <typename Step>
Trace drive(const SolverConfig& config, const Metric& metric, SolverState state, Step&& step) {
  if (!(config.stop.rel_change_tol > 0.0)) throw ArgumentError("run: rel_change_tol must be > 0");
  if (config.known_solution) require_same_size(*config.known_solution, state.x, "run");

  Trace trace;
  if (config.constants) trace.condition_margin = primary_margin(config.algorithm, *config.constants);
  if (config.record_trace) trace.records.reserve(std::min<std::size_t>(config.stop.max_iter, 1 << 16));

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  for (std::size_t it = 0; it < config.stop.max_iter; ++it) {
    SolverState before = state;
    step(state);

    const bool finite = state.x.allFinite() && state.u.allFinite();
    if (!finite || state.x.norm() > kDivergenceNorm) {
      state = std::move(before);
      trace.status = RunStatus::kDiverged;
      break;
    }

    IterationRecord rec;
    rec.k = it;
    rec.E = relative_change(state.x, before.x);
    rec.step_norm = s_norm(metric, state.x - before.x);
    if (config.known_solution) rec.dist = s_norm(metric, state.x - *config.known_solution);
    if (config.observer) rec.cert = config.observer(before, state);
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    trace.iterations = it + 1;
    trace.final_E = rec.E;
    const bool done = rec.E < config.stop.rel_change_tol ||
                      (config.stop.residual_tol && rec.step_norm <= *config.stop.residual_tol);
    if (config.record_trace) trace.records.push_back(std::move(rec));
    if (done) {
      trace.status = RunStatus::kConverged;
      break;
    }
  }
  trace.time_s = std::chrono::duration<double>(Clock::now() - t0).count();
  trace.final_state = std::move(state);
  return trace;
}

}  // namespace

Trace run(const SolverConfig& config, const OperatorTriple& problem, const Vector& x0, const Vector& u0) {
  if (problem.dim > 0 && x0.size() != problem.dim) throw ArgumentError("run: x0 has the wrong dimension");
  const Algorithm alg = config.algorithm;
  if (alg == Algorithm::kFourOp || alg == Algorithm::kNewOrfbs) {
    throw ArgumentError("run: " + std::string(to_string(alg)) + " needs a four-operator split");
  }
  if (config.gamma_schedule && alg != Algorithm::kAlg1) {
    throw ArgumentError("run: step-size schedules are only supported for alg1");
  }
  if (!config.gamma_schedule) require_gamma(config.gamma, "run");

  auto make_kernel = [&](double g) {
    return config.kernel_factory ? config.kernel_factory(g) : kernel_classic(problem.metric, problem.A, g);
  };

  const bool uses_kernel = alg == Algorithm::kAlg1 || alg == Algorithm::kAlg2 || alg == Algorithm::kAlg3;
  std::optional<Kernel> kernel;
  if (uses_kernel) kernel = make_kernel(config.gamma_schedule ? config.gamma_schedule(0) : config.gamma);

  auto step = [&](SolverState& s) {
    switch (alg) {
      case Algorithm::kAlg1:
        if (config.gamma_schedule) {
          const double g = config.gamma_schedule(s.k);
          require_gamma(g, "run");
          if (g != kernel->gamma) kernel = make_kernel(g);
        }
        step_alg1(s, problem, *kernel);
        break;
      case Algorithm::kAlg2:
        step_alg2(s, problem, *kernel);
        break;
      case Algorithm::kAlg3:
        step_alg3(s, problem, *kernel);
        break;
      case Algorithm::kSfrbs:
        step_sfrbs(s, problem, config.gamma);
        break;
      case Algorithm::kSrfbs:
        step_srfbs(s, problem, config.gamma);
        break;
      case Algorithm::kOrfbs:
        step_orfbs(s, problem, config.gamma);
        break;
      case Algorithm::kFbhf:
        step_fbhf(s, problem, config.gamma);
        break;
      default:
        break;
    }
  };
  return drive(config, problem.metric, initial_state(x0, u0), step);
}

Trace run(const SolverConfig& config, const FourOperatorSplit& problem, const Vector& x0) {
  if (problem.dim > 0 && x0.size() != problem.dim) throw ArgumentError("run: x0 has the wrong dimension");
  const Algorithm alg = config.algorithm;
  if (alg != Algorithm::kFourOp && alg != Algorithm::kNewOrfbs) {
    throw ArgumentError("run: " + std::string(to_string(alg)) + " runs on an operator triple");
  }
  require_gamma(config.gamma, "run");
  const Metric metric = Metric::identity(x0.size());
  auto step = [&](SolverState& s) {
    if (alg == Algorithm::kFourOp) {
      step_four_op_sfrbs(s, problem, config.gamma);
    } else {
      step_new_orfbs(s, problem, config.gamma);
    }
  };
  return drive(config, metric, initial_state(x0), step);
}

FourOperatorSplit split_triple(const OperatorTriple& t) {
  require_identity(t.metric, "split_triple");
  FourOperatorSplit f;
  f.A1 = t.A;
  f.A2 = SingleValuedOp::scaled(t.B, 0.5);
  f.B = SingleValuedOp::scaled(t.B, 0.5);
  f.C = t.C;
  f.dim = t.dim;
  f.split = t.split;
  return f;
}

}  // namespace momsplit
