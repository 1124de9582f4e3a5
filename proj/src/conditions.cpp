#include "momsplit/conditions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "momsplit/types.hpp"

namespace momsplit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

double require(const std::optional<double>& v, const char* name, const char* where) {
  if (!v) throw ArgumentError(std::string(where) + ": " + name + " is required");
  if (!(*v > 0.0)) throw ArgumentError(std::string(where) + ": " + name + " must be > 0");
  return *v;
}

/// num / den with a vanishing denominator treated as an inactive constraint.
double ratio_or_inf(double num, double den) {
  if (den == 0.0) return kInf;
  return num / den;
}

double alg3_denominator(const ConstantSet& c, double eps6) {
  return 1.0 - (1.0 + eps6) * c.gamma * c.gamma * c.mu * c.mu;
}

double checked_alg3_denominator(const ConstantSet& c, double eps6, const char* where) {
  const double d = alg3_denominator(c, eps6);
  if (!(d > 0.0)) {
    throw PreconditionError(std::string(where) + ": hypothesis 1 - (1 + eps6) gamma^2 mu^2 > 0 violated (value " +
                            std::to_string(d) + ")");
  }
  return d;
}

double alg3_fraction(const ConstantSet& c, double eps5, double eps6, double alpha, double denom) {
  return (alpha + c.gamma * c.mu * (eps5 * c.mu + 1.0)) * (1.0 + 1.0 / eps6) / denom;
}

ConstantSet without_momentum(ConstantSet c) {
  c.L_prev2 = c.L_prev = c.L_cur = 0.0;
  c.a2_lipschitz.reset();
  return c;
}

}  // namespace

ConstantSet at_gamma(const ConstantSet& c, double gamma) {
  ConstantSet out = c;
  out.gamma = gamma;
  out.gamma_next = gamma;
  if (c.a2_lipschitz) {
    const double L = gamma * *c.a2_lipschitz;
    out.L_prev2 = out.L_prev = out.L_cur = L;
  }
  return out;
}

double check_alg1(const ConstantSet& c) {
  return 1.0 - c.L_prev - c.L_cur - c.gamma * c.mu - c.next_gamma() * c.mu - 0.5 * c.gamma * c.beta - c.eps;
}

Alg2Margins check_alg2(const ConstantSet& c) {
  const double e2 = require(c.eps2, "eps2", "check_alg2");
  const double g = c.gamma;
  Alg2Margins m;
  m.margin1 = 1.0 - 3.0 * c.L_cur - (2.0 + e2 + 2.0 * e2 * e2) * g * c.beta / (2.0 * e2) - c.L_prev -
              g * c.mu * (kSqrt2 + 1.0) - c.eps;
  m.margin2 = 1.0 - c.L_prev - c.L_prev2 - g * c.mu * (kSqrt2 + 1.0) - c.eps;
  return m;
}

double alg3_decrease_coefficient(const ConstantSet& c) {
  const double e5 = require(c.eps5, "eps5", "check_alg3");
  const double e6 = require(c.eps6, "eps6", "check_alg3");
  const double alpha = require(c.alpha, "alpha", "check_alg3");
  const double d = checked_alg3_denominator(c, e6, "check_alg3");
  const double g = c.gamma;
  return 1.0 - c.L_prev - c.L_cur - g * c.L_cur * c.L_cur * c.mu - 0.5 * g * c.beta - g / e5 -
         alg3_fraction(c, e5, e6, alpha, d);
}

Alg3Check check_alg3(const ConstantSet& c) {
  const double e5 = require(c.eps5, "eps5", "check_alg3");
  const double e6 = require(c.eps6, "eps6", "check_alg3");
  const double e7 = require(c.eps7, "eps7", "check_alg3");
  Alg3Check out;
  out.margin_i = alg3_decrease_coefficient(c) - c.eps;
  out.margin_ii = 1.0 - e7 * c.mu * (e5 * c.mu + 1.0);
  if (c.mu > 0.0) {
    const double scale = (1.0 + e6) * c.mu * c.mu;
    out.window.hi = std::sqrt(1.0 / scale);
    out.window.lo = std::max(e7, std::sqrt(std::max(0.0, out.margin_ii) / scale));
  } else {
    out.window.lo = kInf;
    out.window.hi = kInf;
  }
  out.gamma_in_window = out.window.contains(c.gamma);
  return out;
}

double fbhf_chi(double mu, double beta) { return 4.0 / (beta + std::sqrt(beta * beta + 16.0 * mu * mu)); }

double check_fbhf(const ConstantSet& c) { return fbhf_chi(c.mu, c.beta) - c.gamma - c.eps; }

double rate_t_alg1(const ConstantSet& c) {
  const double rho = c.rho.value_or(0.0);
  if (rho < 0.0) throw ArgumentError("rate_t_alg1: rho must be >= 0");
  const double e1 = require(c.eps1, "eps1", "rate_t_alg1");
  const double margin = check_alg1(c);
  if (margin < 0.0) throw ConditionError("rate_t_alg1: step-size condition fails (margin " + std::to_string(margin) + ")");
  const double kappa = margin + c.eps;
  const double gn = c.next_gamma();
  const double first = 2.0 * c.gamma * rho / (1.0 + c.L_cur / e1 + gn * c.mu);
  const double second = ratio_or_inf(kappa, e1 * c.L_cur + 2.0 * gn * c.mu + c.L_cur);
  return std::min(first, second);
}

double rate_t_alg2(const ConstantSet& c) {
  const double rho = c.rho.value_or(0.0);
  if (rho < 0.0) throw ArgumentError("rate_t_alg2: rho must be >= 0");
  const double e3 = require(c.eps3, "eps3", "rate_t_alg2");
  const double e4 = require(c.eps4, "eps4", "rate_t_alg2");
  const Alg2Margins m = check_alg2(c);
  if (!m.ok()) throw ConditionError("rate_t_alg2: step-size conditions fail");
  const double p = m.margin1 + c.eps;
  const double q = m.margin2 + c.eps;
  const double g = c.gamma;
  const double first = 2.0 * g * rho / (1.0 + c.L_cur / e3 + 2.0 * e4 * g * c.mu);
  // The displayed middle denominator carries gamma*beta (not gamma*beta/eps2).
  const double second = ratio_or_inf(
      p, 1.0 + 5.0 * c.L_prev + (e3 + 5.0) * c.L_cur + g * c.beta + g * c.mu * (1.0 / e4 + kSqrt2 + 1.0));
  const double third = ratio_or_inf(q, g * c.mu * (2.0 * e4 + 1.0) + 4.0 * c.L_prev);
  return std::min({first, second, third});
}

double alg3_A_rate(const ConstantSet& c) {
  const double e5 = require(c.eps5, "eps5", "alg3_A_rate");
  const double e6 = require(c.eps6, "eps6", "alg3_A_rate");
  const double alpha = require(c.alpha, "alpha", "alg3_A_rate");
  const double d = checked_alg3_denominator(c, e6, "alg3_A_rate");
  const double g2m2 = c.gamma * c.gamma * c.mu * c.mu;
  return (alpha * (1.0 + e6) * g2m2 + c.gamma * c.mu * (e5 * c.mu + 1.0)) / d;
}

double rate_t_alg3(const ConstantSet& c) {
  const double rho = c.rho.value_or(0.0);
  if (rho < 0.0) throw ArgumentError("rate_t_alg3: rho must be >= 0");
  const double e5 = require(c.eps5, "eps5", "rate_t_alg3");
  const double e6 = require(c.eps6, "eps6", "rate_t_alg3");
  const double e7 = require(c.eps7, "eps7", "rate_t_alg3");
  const double e8 = require(c.eps8, "eps8", "rate_t_alg3");
  const double alpha = require(c.alpha, "alpha", "rate_t_alg3");
  const double g = c.gamma;
  const double mu = c.mu;
  const double d = checked_alg3_denominator(c, e6, "rate_t_alg3");

  const double x_term = 2.0 * g * g * rho * mu * mu * (1.0 / e7 - g);
  const double floor = std::max(x_term, d - g * mu * (e5 * mu + 1.0));
  if (!(alpha > floor)) {
    throw ConditionError("rate_t_alg3: alpha " + std::to_string(alpha) + " must exceed floor " + std::to_string(floor));
  }
  if (!(e7 < 1.0 && e7 * g < 1.0)) throw ConditionError("rate_t_alg3: eps7 must satisfy eps7 < 1 and eps7 < 1/gamma");
  const double a_rate = alg3_A_rate(c);
  if (!(e8 > g / (a_rate + alpha) && e8 < g)) {
    throw ConditionError("rate_t_alg3: eps8 must lie in (gamma/(A_rate + alpha), gamma)");
  }
  const double nu = alg3_decrease_coefficient(c);
  if (nu < 0.0) throw ConditionError("rate_t_alg3: decrease coefficient is negative (" + std::to_string(nu) + ")");
  (void)e5;

  // Positive root of gm(1+gm) t^2 + P t - 2 g rho (1 - g eps7) = 0, in the
  // rationalized form that stays finite as mu -> 0.
  const double gm = g * mu;
  const double P = 1.0 + gm * (2.0 + gm) + c.L_cur;
  const double disc = P * P + 8.0 * g * g * rho * mu * (1.0 + gm) * (1.0 - g * e7);
  const double root = 4.0 * g * rho * (1.0 - g * e7) / (std::sqrt(disc) + P);

  const std::array<double, 4> args{
      root,
      ratio_or_inf(nu, 2.0 * c.L_cur),
      ratio_or_inf(alpha - x_term, a_rate + x_term),
      (e8 * (a_rate + alpha) - g) / g,
  };
  return *std::min_element(args.begin(), args.end());
}

double rate_floor_alg1(const ConstantSet& c) { return 1.0 - c.L_cur - c.next_gamma() * c.mu; }

double rate_floor_alg2(const ConstantSet& c) { return 1.0 - c.L_cur - c.gamma * c.mu; }

double rate_floor_alg3(const ConstantSet& c, double t) {
  const double gm = c.gamma * c.mu;
  return 1.0 + t * gm * (1.0 + gm) - c.L_cur;
}

double primary_margin(Algorithm algorithm, const ConstantSet& c) {
  switch (algorithm) {
    case Algorithm::kSfrbs:
      return check_alg1(without_momentum(c));
    case Algorithm::kAlg1:
    case Algorithm::kFourOp:
      return check_alg1(c);
    case Algorithm::kSrfbs: {
      const Alg2Margins m = check_alg2(without_momentum(c));
      return std::min(m.margin1, m.margin2);
    }
    case Algorithm::kAlg2: {
      const Alg2Margins m = check_alg2(c);
      return std::min(m.margin1, m.margin2);
    }
    case Algorithm::kOrfbs:
    case Algorithm::kAlg3:
    case Algorithm::kNewOrfbs: {
      const ConstantSet cc = algorithm == Algorithm::kOrfbs ? without_momentum(c) : c;
      const double e6 = require(cc.eps6, "eps6", "primary_margin");
      if (!(alg3_denominator(cc, e6) > 0.0)) return -kInf;
      return alg3_decrease_coefficient(cc) - cc.eps;
    }
    case Algorithm::kFbhf:
      return check_fbhf(c);
  }
  return -kInf;
}

MaxGamma max_gamma(Algorithm algorithm, const ConstantSet& c) {
  auto margin = [&](double g) { return primary_margin(algorithm, at_gamma(c, g)); };
  MaxGamma out;
  if (margin(0.0) < 0.0) return out;

  double lo = 0.0;
  double hi = 1.0;
  while (margin(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e15) {
      out.value = kInf;
      out.feasible = true;
      return out;
    }
  }
  for (int it = 0; it < 400 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (margin(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.value = lo;
  out.feasible = lo > 0.0;
  return out;
}

}  // namespace momsplit
