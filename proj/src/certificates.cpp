#include "momsplit/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "momsplit/conditions.hpp"

namespace momsplit {

namespace {

const double kSqrt2 = std::sqrt(2.0);

double need(const std::optional<double>& v, const char* name) {
  if (!v) throw ArgumentError(std::string("certificate: ") + name + " is required");
  return *v;
}

double sq(const Metric& m, const Vector& v) { return s_norm_sq(m, v); }

long idx(const SolverState& s) { return static_cast<long>(s.k); }

double s_denominator(const CertContext& ctx) {
  const double e6 = need(ctx.eps6, "eps6");
  const double d = 1.0 - (1.0 + e6) * ctx.gamma * ctx.gamma * ctx.mu * ctx.mu;
  if (!(d > 0.0)) throw PreconditionError("s_cert: hypothesis 1 - (1 + eps6) gamma^2 mu^2 > 0 violated");
  return d;
}

ConstantSet alg3_constants(const CertContext& ctx, long k) {
  ConstantSet c;
  c.mu = ctx.mu;
  c.beta = ctx.beta;
  c.gamma = ctx.gamma;
  c.L_prev = ctx.L_of(k - 1);
  c.L_cur = ctx.L_of(k);
  c.eps5 = ctx.eps5;
  c.eps6 = ctx.eps6;
  c.alpha = ctx.alpha;
  return c;
}

}  // namespace

double CertContext::gamma_of(long k) const {
  return gamma_at ? gamma_at(static_cast<std::size_t>(std::max(k, 0L))) : gamma;
}

double CertContext::L_of(long k) const { return L_at ? L_at(static_cast<std::size_t>(std::max(k, 0L))) : L; }

double psi(const CertContext& ctx, const SolverState& s) {
  const long k = idx(s);
  const double g = ctx.gamma_of(k);
  const Vector e = s.x - ctx.x_star;
  const Vector dx = s.x - s.x_prev;
  const Vector dB = ctx.B(s.x) - ctx.B(s.x_prev);
  return sq(ctx.metric, e) + 2.0 * s.u.dot(e) + (g * ctx.mu + ctx.L_of(k - 1)) * sq(ctx.metric, dx) -
         2.0 * g * dB.dot(e);
}

double gamma_cert(const CertContext& ctx, const SolverState& s) {
  const Vector e = s.x - ctx.x_star;
  const Vector dx = s.x - s.x_prev;
  const Vector dB = ctx.B(s.y_prev) - ctx.B(ctx.x_star);
  return sq(ctx.metric, e) + 2.0 * s.u.dot(e) + 2.0 * ctx.gamma * dB.dot(dx) + 2.0 * (s.u - s.u_prev).dot(dx);
}

double xi(const CertContext& ctx, const SolverState& s) {
  const double e2 = need(ctx.eps2, "eps2");
  const long k = idx(s);
  const double gm = ctx.gamma * ctx.mu;
  const double w = 1.0 + 3.0 * ctx.L_of(k - 1) + ctx.gamma * ctx.beta / e2 + gm * (kSqrt2 + 1.0);
  return gamma_cert(ctx, s) + w * sq(ctx.metric, s.x - s.x_prev) + ctx.L_of(k - 2) * sq(ctx.metric, s.x_prev - s.x_prev2) +
         gm * sq(ctx.metric, s.x - s.y_prev);
}

double s_cert(const CertContext& ctx, const SolverState& s) {
  const double e5 = need(ctx.eps5, "eps5");
  const double alpha = need(ctx.alpha, "alpha");
  const double d = s_denominator(ctx);
  const long k = idx(s);
  const double g = ctx.gamma;
  const Vector shifted = (s.x - ctx.x_star) + g * ctx.metric.apply_inv(ctx.B(s.x_prev) - ctx.B(ctx.x_star));
  const double w = (alpha + g * ctx.mu * (e5 * ctx.mu + 1.0)) / d;
  return sq(ctx.metric, shifted) + 2.0 * s.u.dot(s.x - ctx.x_star) +
         ctx.L_of(k - 1) * sq(ctx.metric, s.y_prev - s.x_prev) + w * sq(ctx.metric, s.x - s.x_prev);
}

double psi_lower_bound(const CertContext& ctx, const SolverState& s) {
  const long k = idx(s);
  return (1.0 - ctx.L_of(k - 1) - ctx.gamma_of(k) * ctx.mu) * sq(ctx.metric, s.x - ctx.x_star);
}

double xi_lower_bound(const CertContext& ctx, const SolverState& s) {
  const double e2 = need(ctx.eps2, "eps2");
  const long k = idx(s);
  const double gm = ctx.gamma * ctx.mu;
  return (1.0 - ctx.L_of(k - 1) - gm) * sq(ctx.metric, s.x - ctx.x_star) +
         (1.0 + ctx.gamma * ctx.beta / e2 - ctx.L_of(k - 2) + (kSqrt2 - 1.0) * gm) * sq(ctx.metric, s.x - s.x_prev);
}

double psi_required_drop(const CertContext& ctx, const SolverState& before, const SolverState& after) {
  const long k = idx(before);
  ConstantSet c;
  c.mu = ctx.mu;
  c.beta = ctx.beta;
  c.L_prev = ctx.L_of(k - 1);
  c.L_cur = ctx.L_of(k);
  c.gamma = ctx.gamma_of(k);
  c.gamma_next = ctx.gamma_of(k + 1);
  c.eps = 0.0;
  return check_alg1(c) * sq(ctx.metric, after.x - before.x);
}

double xi_required_drop(const CertContext& ctx, const SolverState& before, const SolverState& after) {
  const long k = idx(before);
  ConstantSet c;
  c.mu = ctx.mu;
  c.beta = ctx.beta;
  c.gamma = ctx.gamma;
  c.L_prev2 = ctx.L_of(k - 2);
  c.L_prev = ctx.L_of(k - 1);
  c.L_cur = ctx.L_of(k);
  c.eps = 0.0;
  c.eps2 = ctx.eps2;
  const Alg2Margins m = check_alg2(c);
  // after.y_prev is y_k = 2 x_k - x_{k-1}.
  return m.margin1 * sq(ctx.metric, after.x - before.x) + m.margin2 * sq(ctx.metric, after.x - after.y_prev);
}

double s_required_drop(const CertContext& ctx, const SolverState& before, const SolverState& after) {
  const double nu = alg3_decrease_coefficient(alg3_constants(ctx, idx(before)));
  return nu * sq(ctx.metric, after.y_prev - before.x);
}

bool verify_zero(const OperatorTriple& t, const Vector& x, double tol, double gamma_ref) {
  if (!x.allFinite()) return false;
  const Vector fb = t.B(x) + t.C(x);
  const Vector p = t.A(gamma_ref, x - gamma_ref * fb);
  return (x - p).norm() <= tol;
}

CertKind certificate_for(Algorithm a) {
  switch (a) {
    case Algorithm::kAlg1:
    case Algorithm::kSfrbs:
      return CertKind::kPsi;
    case Algorithm::kAlg2:
    case Algorithm::kSrfbs:
      return CertKind::kXi;
    case Algorithm::kAlg3:
    case Algorithm::kOrfbs:
    case Algorithm::kNewOrfbs:
      return CertKind::kS;
    case Algorithm::kFbhf:
    case Algorithm::kFourOp:
      break;
  }
  throw UnsupportedConfiguration("no certificate is defined for " + std::string(to_string(a)));
}

CertificateMonitor::CertificateMonitor(CertKind kind, CertContext ctx)
    : data_(std::make_shared<Data>(Data{kind, std::move(ctx), {}})) {}

double CertificateMonitor::value(const SolverState& s) const {
  switch (data_->kind) {
    case CertKind::kPsi:
      return psi(data_->ctx, s);
    case CertKind::kXi:
      return xi(data_->ctx, s);
    case CertKind::kS:
      return s_cert(data_->ctx, s);
  }
  return 0.0;
}

Observer CertificateMonitor::observer() const {
  auto data = data_;
  CertificateMonitor self = *this;
  return [data, self](const SolverState& before, const SolverState& after) -> std::optional<double> {
    const CertContext& ctx = data->ctx;
    CertStep step;
    step.k = before.k;
    step.before = data->steps.empty() ? self.value(before) : data->steps.back().after;
    step.after = self.value(after);
    switch (data->kind) {
      case CertKind::kPsi:
        step.required_drop = psi_required_drop(ctx, before, after);
        step.lower_bound = psi_lower_bound(ctx, after);
        break;
      case CertKind::kXi:
        step.required_drop = xi_required_drop(ctx, before, after);
        step.lower_bound = xi_lower_bound(ctx, after);
        break;
      case CertKind::kS:
        step.required_drop = s_required_drop(ctx, before, after);
        break;
    }
    const double tol = 1e-9 * (1.0 + std::abs(step.before));
    step.slack = step.before - step.required_drop - step.after;
    step.decrease_ok = step.slack >= -tol;
    if (step.lower_bound) step.lower_ok = step.after >= *step.lower_bound - 1e-9 * (1.0 + std::abs(step.after));
    data->steps.push_back(step);
    return step.after;
  };
}

bool CertificateMonitor::all_ok() const { return !first_violation().has_value(); }

std::optional<CertStep> CertificateMonitor::first_violation() const {
  for (const CertStep& s : data_->steps) {
    if (!s.decrease_ok || !s.lower_ok) return s;
  }
  return std::nullopt;
}

double rlinear_bound(double V1, double k_const, double t, std::size_t k) {
  if (!(k_const > 0.0)) throw ArgumentError("rlinear_bound: constant must be > 0");
  const double e = k >= 1 ? static_cast<double>(k - 1) : 0.0;
  return V1 / (k_const * std::pow(1.0 + t, e));
}

double alg3_rate_potential(const CertContext& ctx, const SolverState& s, double t, double a_rate) {
  const double alpha = need(ctx.alpha, "alpha");
  const long k = idx(s);
  const double g = ctx.gamma;
  const double gm = g * ctx.mu;
  const Vector e = s.x - ctx.x_star;
  const Vector dB = ctx.B(s.x_prev) - ctx.B(ctx.x_star);
  const double d = 2.0 * g * dB.dot(e) + g * g * s_inv_norm_sq(ctx.metric, dB) + 2.0 * s.u.dot(e) +
                   ctx.L_of(k - 1) * sq(ctx.metric, s.y_prev - s.x_prev);
  return (1.0 + t * gm * (1.0 + gm)) * sq(ctx.metric, e) + d + (a_rate + alpha) / (1.0 + t) * sq(ctx.metric, s.x - s.x_prev);
}

Vector over_solve(SolverConfig config, const OperatorTriple& t, const Vector& x0, const Vector& u0) {
  config.stop.rel_change_tol /= 10.0;
  config.stop.max_iter *= 10;
  config.record_trace = false;
  config.observer = nullptr;
  return run(config, t, x0, u0).final_state.x;
}

}  // namespace momsplit
