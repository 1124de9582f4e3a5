#pragma once

#include <optional>

#include "momsplit/algorithm.hpp"

namespace momsplit {

/// Constants entering the step-size conditions and linear-rate formulas.
///
/// Indices follow the iteration they describe: `L_cur` is L_k, `L_prev` is
/// L_{k-1}, `L_prev2` is L_{k-2}. `gamma_next` defaults to `gamma` (constant
/// schedule) when unset.
struct ConstantSet {
  double mu = 0.0;
  double beta = 0.0;
  double L_prev2 = 0.0;
  double L_prev = 0.0;
  double L_cur = 0.0;
  double gamma = 0.0;
  std::optional<double> gamma_next;
  std::optional<double> rho;
  double eps = 1e-6;
  std::optional<double> eps1, eps2, eps3, eps4, eps5, eps6, eps7, eps8;
  std::optional<double> alpha;
  /// When set, the kernel is the Lipschitz split M = Id/gamma - A2 and every
  /// L is gamma * a2_lipschitz (used by max_gamma as gamma varies).
  std::optional<double> a2_lipschitz;

  double next_gamma() const { return gamma_next.value_or(gamma); }
};

/// Copy of `c` at step size `gamma` (both gamma_k and gamma_{k+1}), with the
/// L's refreshed when the kernel is the Lipschitz split.
ConstantSet at_gamma(const ConstantSet& c, double gamma);

struct Alg2Margins {
  double margin1 = 0.0;
  double margin2 = 0.0;
  bool ok() const { return margin1 >= 0.0 && margin2 >= 0.0; }
};

struct GammaWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double g) const { return g >= lo && g <= hi; }
};

struct Alg3Check {
  double margin_i = 0.0;
  double margin_ii = 0.0;
  GammaWindow window;
  bool gamma_in_window = false;
  bool ok() const { return margin_i >= 0.0 && margin_ii > 0.0 && gamma_in_window; }
};

/// Left side of the Algorithm 1 condition minus eps.
double check_alg1(const ConstantSet& c);
/// Both Algorithm 2 conditions minus eps. Requires eps2.
Alg2Margins check_alg2(const ConstantSet& c);
/// Algorithm 3 conditions (i)-(iii). Requires eps5, eps6, eps7, alpha and
/// 1 - (1 + eps6) gamma^2 mu^2 > 0.
Alg3Check check_alg3(const ConstantSet& c);

/// The per-iteration decrease coefficient of the Algorithm 3 certificate
/// (condition (i) without eps). Needs eps5, eps6, alpha.
double alg3_decrease_coefficient(const ConstantSet& c);

/// FBHF step-size ceiling chi = 4 / (beta + sqrt(beta^2 + 16 mu^2)).
double fbhf_chi(double mu, double beta);
/// chi - gamma - eps (eps plays the role of the margin eta).
double check_fbhf(const ConstantSet& c);

/// Linear-rate exponent t; the certified bound decays like (1 + t)^-k.
/// Zero denominators drop the corresponding argument from the minimum.
double rate_t_alg1(const ConstantSet& c);
double rate_t_alg2(const ConstantSet& c);
double rate_t_alg3(const ConstantSet& c);

/// The scalar the Algorithm 3 rate theorem calls "A" (renamed to avoid the
/// clash with the set-valued operator).
double alg3_A_rate(const ConstantSet& c);

/// Explicit lower-bound coefficients turning the Lyapunov value into a
/// bound on ||x_k - x*||_S^2.
double rate_floor_alg1(const ConstantSet& c);
double rate_floor_alg2(const ConstantSet& c);
double rate_floor_alg3(const ConstantSet& c, double t);

struct MaxGamma {
  double value = 0.0;
  bool feasible = false;
};

/// Largest constant step size whose margin is nonnegative (bisection, 1e-12).
/// For Algorithm 3 families the margin is condition (i) under the lemma
/// hypothesis; the gamma window of condition (iii) is reported separately.
MaxGamma max_gamma(Algorithm algorithm, const ConstantSet& c);

/// Signed margin used by max_gamma for the given algorithm.
double primary_margin(Algorithm algorithm, const ConstantSet& c);

}  // namespace momsplit
