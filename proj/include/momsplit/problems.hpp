#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "momsplit/operators.hpp"

namespace momsplit {

/// Primal set X of a saddle problem  min h(x) s.t. x in X, Dx + b <= 0.
enum class PrimalSet { kBox01, kCappedSimplex, kNonneg, kFree };

Vector project_primal(PrimalSet set, const Vector& x);
Resolvent primal_resolvent(PrimalSet set);

/// Data of  min h(x) s.t. x in X, Dx + b <= 0, with grad h linear.
///
/// The operator triple acts on z = (x, u): A = N_X x N_{R+^q},
/// B(x, u) = (D^T u, -Dx - b), C(x, u) = (grad h(x), 0).
struct SaddleProblem {
  PrimalSet primal_set = PrimalSet::kBox01;
  Matrix D;
  Vector b;
  /// grad h(x) and its cocoercivity constant beta.
  VectorMap grad_h;
  double beta = 0.0;
  double mu = 0.0;
  Index n = 0;
  Index q = 0;
  OperatorTriple triple;
  /// Concatenated starting point (x0, u0).
  Vector z0;
  /// h(x), when the builder knows it.
  std::function<double(const Vector&)> objective;

  Vector primal(const Vector& z) const { return z.head(n); }
  Vector dual(const Vector& z) const { return z.tail(q); }
};

/// Builds the operator triple and constants; mu = ||D||, beta as given.
SaddleProblem make_saddle(PrimalSet set, Matrix D, Vector b, VectorMap grad_h, double beta, Vector z0);

struct QpInstance {
  Matrix G;
  Matrix D;
  Vector b;
  std::uint64_t seed = 0;
  Index m = 0;
};

/// Random constrained least squares  min 1/2 ||Gx - b||^2 s.t. x in [0,1]^N, Dx <= 0,
/// with N = 2m. Entries of G and D are N(0,1)/sqrt(N), b ~ N(0,1),
/// x0 ~ U[0,1]^N and u0 = 0, all from a mt19937_64 seeded with `seed`.
struct QpProblem {
  QpInstance data;
  SaddleProblem saddle;
};
QpProblem build_qp(Index m, Index q, std::uint64_t seed);

/// B = B1 + B2 with B1 = B2 = B/2, each (mu/2)-Lipschitz.
std::pair<SingleValuedOp, SingleValuedOp> split_half(const SingleValuedOp& B);

struct AssetData {
  Vector means;
  Matrix cov;
};

/// OR-Library portfolio file: n; n lines "mean stddev"; lines "i j corr" (1-based).
/// Missing diagonal pairs default to correlation 1.
AssetData parse_or_library(const std::filesystem::path& path);
AssetData parse_or_library_text(const std::string& text);
/// CSV: first row the means, then n rows of the covariance matrix.
AssetData parse_csv_covariance(const std::filesystem::path& path);
AssetData parse_csv_covariance_text(const std::string& text);

struct PortfolioProblem {
  AssetData data;
  double r = 0.0;
  std::vector<Index> groups;
  double group_floor = 0.3;
  SaddleProblem saddle;
};

/// Mean-variance portfolio  min 1/2 x^T H x  s.t. sum x = 1, 0 <= x <= 1,
/// m^T x >= r and each group sum >= floor. `groups` defaults to three equal
/// blocks (75/75/75 for the 225-asset set). Starts at x = 1/n, u = 0.
PortfolioProblem build_portfolio(const AssetData& data, double r, std::vector<Index> groups = {},
                                 double group_floor = 0.3);

double objective_portfolio(const Matrix& H, const Vector& x);

struct KktResiduals {
  /// ||x - P_X(x - grad h(x) - D^T u)||
  double stationarity = 0.0;
  /// max_i |u_i g_i(x)|
  double complementarity = 0.0;
  /// max(max_i g_i(x), dist(x, X))
  double primal_infeasibility = 0.0;
  /// max_i max(-u_i, 0)
  double dual_infeasibility = 0.0;
};

KktResiduals kkt_residuals(const SaddleProblem& p, const Vector& z);

/// Problem from a JSON document:
/// {"primal_set": "box"|"capped_simplex"|"nonneg"|"free",
///  "H": [[..]] or "G": [[..]] with "h_offset": [..],
///  "D": [[..]], "b": [..], "x0": [..] (optional)}.
/// Objective 1/2 x^T H x or 1/2 ||Gx - h_offset||^2.
SaddleProblem load_custom_problem(const std::filesystem::path& path);
SaddleProblem parse_custom_problem(const std::string& json_text);

}  // namespace momsplit
