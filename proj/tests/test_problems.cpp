#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "cli.hpp"
#include "momsplit/conditions.hpp"
#include "momsplit/problems.hpp"
#include "momsplit/solvers.hpp"
#include "oracles/oracles.hpp"
#include "test_util.hpp"

using namespace momsplit;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

/// Solves a saddle problem with the CLI's automatic step size.
Trace solve(const SaddleProblem& p, Algorithm a, double tol, long max_iter = 2000000) {
  cli::RunConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  cli::AlgorithmSetup s = cli::setup_algorithm(a, p, cfg);
  s.solver.record_trace = false;
  if (s.split) return run(s.solver, *s.split, p.z0);
  return run(s.solver, s.triple, p.z0);
}

std::optional<std::filesystem::path> port5_path() {
  if (const char* env = std::getenv("MOMSPLIT_PORT5")) {
    if (std::filesystem::exists(env)) return std::filesystem::path(env);
  }
  return std::nullopt;
}

}  // namespace

// --- random QP ----------------------------------------------------------------

TEST(BuildQp, DeterministicPerSeed) {
  const QpProblem a = build_qp(10, 4, 99), b = build_qp(10, 4, 99), c = build_qp(10, 4, 100);
  EXPECT_EQ(a.data.G, b.data.G);
  EXPECT_EQ(a.data.D, b.data.D);
  EXPECT_EQ(a.data.b, b.data.b);
  EXPECT_EQ(a.saddle.z0, b.saddle.z0);
  EXPECT_NE(a.data.G, c.data.G);
}

TEST(BuildQp, ShapesAndStart) {
  const QpProblem p = build_qp(10, 4, 3);
  EXPECT_EQ(p.data.G.rows(), 10);
  EXPECT_EQ(p.data.G.cols(), 20);
  EXPECT_EQ(p.data.D.rows(), 4);
  EXPECT_EQ(p.data.D.cols(), 20);
  EXPECT_EQ(p.saddle.triple.dim, 24);
  EXPECT_EQ(*p.saddle.triple.split, 20);
  EXPECT_GE(p.saddle.z0.head(20).minCoeff(), 0.0);
  EXPECT_LE(p.saddle.z0.head(20).maxCoeff(), 1.0);
  EXPECT_EQ(p.saddle.z0.tail(4).norm(), 0.0);
}

TEST(BuildQp, ConstantsMatchDenseSpectrum) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const QpProblem p = build_qp(50, 10, seed);
    const double beta = std::pow(oracle::spectral_norm(p.data.G), 2);
    const double mu = oracle::spectral_norm(p.data.D);
    EXPECT_NEAR(p.saddle.beta, beta, 1e-6 * beta);
    EXPECT_NEAR(p.saddle.mu, mu, 1e-6 * mu);
    EXPECT_GT(p.saddle.mu, 0);
    EXPECT_GT(p.saddle.beta, 0);
  }
}

TEST(BuildQp, SaddleOperatorIsSkewAndCIsTheGradient) {
  const QpProblem p = build_qp(10, 4, 5);
  const OperatorTriple& t = p.saddle.triple;
  std::mt19937_64 rng(61);
  for (int i = 0; i < 200; ++i) {
    const Vector z = random_vector(rng, 24), w = random_vector(rng, 24);
    const Vector zero_b = t.B(z) - t.B(w);
    EXPECT_NEAR(zero_b.dot(z - w), 0.0, 1e-10 * (1 + (z - w).squaredNorm()));
    const Vector cz = t.C(z);
    EXPECT_LE((cz.head(20) - quad_grad(p.data.G, p.data.b, z.head(20))).norm(), 1e-12);
    EXPECT_EQ(cz.tail(4).norm(), 0.0);
  }
}

TEST(SplitHalf, ReconstructsAndHalvesLipschitz) {
  const QpProblem p = build_qp(10, 4, 6);
  const auto [b1, b2] = split_half(p.saddle.triple.B);
  EXPECT_NEAR(b1.lipschitz_mu, p.saddle.mu / 2, 1e-15);
  std::mt19937_64 rng(62);
  for (int i = 0; i < 500; ++i) {
    const Vector z = random_vector(rng, 24), w = random_vector(rng, 24);
    EXPECT_LE((b1(z) + b2(z) - p.saddle.triple.B(z)).norm(), 1e-14 * (1 + z.norm()));
    EXPECT_LE((b1(z) - b1(w)).norm(), p.saddle.mu / 2 * (z - w).norm() * (1 + 1e-9));
  }
  // b = 0 in the QP, so the halves are linear.
  EXPECT_EQ(b1(Vector::Zero(24)).norm(), 0.0);
}

TEST(BuildQp, OrfbsAndNewOrfbsAgree) {
  const QpProblem p = build_qp(20, 10, 8);
  const Trace a = solve(p.saddle, Algorithm::kOrfbs, 1e-6);
  const Trace b = solve(p.saddle, Algorithm::kNewOrfbs, 1e-6);
  ASSERT_EQ(a.status, RunStatus::kConverged);
  ASSERT_EQ(b.status, RunStatus::kConverged);
  EXPECT_LE((a.final_state.x - b.final_state.x).norm(), 1e-4);
}

TEST(BuildQp, ConvergedPointSatisfiesKkt) {
  const QpProblem p = build_qp(20, 10, 9);
  const Trace tr = solve(p.saddle, Algorithm::kSfrbs, 1e-12);
  ASSERT_EQ(tr.status, RunStatus::kConverged);
  const KktResiduals r = kkt_residuals(p.saddle, tr.final_state.x);
  EXPECT_LE(r.stationarity, 1e-5);
  EXPECT_LE(r.complementarity, 1e-5);
  EXPECT_LE(r.primal_infeasibility, 1e-6);
  EXPECT_LE(r.dual_infeasibility, 1e-6);
}

// --- datasets -------------------------------------------------------------------

TEST(ParseOrLibrary, TwoAssetsByHand) {
  const AssetData d = parse_or_library_text("2\n0.01 1\n-0.02 2\n1 1 1\n1 2 0.5\n2 2 1\n");
  Matrix H(2, 2);
  H << 1, 1, 1, 4;
  EXPECT_LE((d.cov - H).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(d.means[0], 0.01);
  EXPECT_DOUBLE_EQ(d.means[1], -0.02);
}

TEST(ParseOrLibrary, DiagonalPairsMayBeOmitted) {
  const AssetData d = parse_or_library_text("2\n0 1\n0 2\n1 2 0.5\n");
  EXPECT_DOUBLE_EQ(d.cov(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.cov(1, 1), 4.0);
  EXPECT_DOUBLE_EQ(d.cov(1, 0), 1.0);
}

TEST(ParseOrLibrary, MalformedLineReportsLineNumber) {
  try {
    parse_or_library_text("2\n0.01 1\n-0.02 oops\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_or_library_text(""), ParseError);
  EXPECT_THROW(parse_or_library_text("2\n0 1\n0 1\n1 3 0.5\n"), ParseError);
}

TEST(ParseOrLibrary, NonPsdIsDataError) {
  EXPECT_THROW(parse_or_library_text("2\n0 1\n0 1\n1 2 2.0\n"), DataError);
}

TEST(ParseCsv, MeansThenCovariance) {
  const AssetData d = parse_csv_covariance_text("0.1,0.2\n2,0.5\n0.5,1\n");
  EXPECT_DOUBLE_EQ(d.means[1], 0.2);
  EXPECT_DOUBLE_EQ(d.cov(0, 1), 0.5);
  EXPECT_THROW(parse_csv_covariance_text("0.1,0.2\n2,0.5\n"), ParseError);
  EXPECT_THROW(parse_or_library("/nonexistent/port5.txt"), std::exception);
}

TEST(Port5, PublishedConstants) {
  const auto path = port5_path();
  if (!path) GTEST_SKIP() << "set MOMSPLIT_PORT5 to the OR-Library port5.txt file to run this test";
  const AssetData d = parse_or_library(*path);
  EXPECT_EQ(d.means.size(), 225);
  EXPECT_NEAR(d.means.minCoeff(), -0.008489, 1e-6);
  EXPECT_NEAR(d.means.maxCoeff(), 0.003971, 1e-6);
  EXPECT_NEAR(operator_norm(d.cov).value, 0.2263, 1e-3);
}

// --- portfolio --------------------------------------------------------------------

namespace {

AssetData six_assets() {
  std::mt19937_64 rng(63);
  const Matrix R = random_matrix(rng, 6, 6);
  AssetData d;
  d.cov = 0.01 * (R * R.transpose()) + 0.001 * Matrix::Identity(6, 6);
  // Positive means keep every tested target return attainable.
  d.means = (0.001 + 0.002 * random_vector(rng, 6).cwiseAbs().array()).matrix();
  return d;
}

}  // namespace

TEST(Portfolio, StructureOfConstraints) {
  const AssetData d = six_assets();
  const PortfolioProblem p = build_portfolio(d, 0.001);
  ASSERT_EQ(p.saddle.q, 4);
  EXPECT_EQ(p.saddle.D.row(0).transpose(), Vector(-d.means));
  EXPECT_EQ(p.saddle.D(1, 0), -1.0);
  EXPECT_EQ(p.saddle.D(1, 2), 0.0);
  EXPECT_EQ(p.saddle.D(3, 5), -1.0);
  EXPECT_DOUBLE_EQ(p.saddle.b[0], 0.001);
  EXPECT_DOUBLE_EQ(p.saddle.b[3], 0.3);
  EXPECT_NEAR(p.saddle.beta, oracle::spectral_norm(d.cov), 1e-6 * p.saddle.beta);
  EXPECT_NEAR(p.saddle.mu, oracle::spectral_norm(p.saddle.D), 1e-6 * p.saddle.mu);
  EXPECT_LE((p.saddle.z0.head(6) - Vector::Constant(6, 1.0 / 6)).norm(), 1e-15);
  EXPECT_THROW(build_portfolio(d, 0.001, {2, 2, 3}), ArgumentError);
  EXPECT_NO_THROW(build_portfolio(d, 0.001, {1, 5}));
}

TEST(Portfolio, MatchesExhaustiveKktOracle) {
  const AssetData d = six_assets();
  for (double r : {0.0, 0.001, 0.0015}) {
    const PortfolioProblem p = build_portfolio(d, r);
    const Trace tr = solve(p.saddle, Algorithm::kOrfbs, 1e-12);
    ASSERT_EQ(tr.status, RunStatus::kConverged);
    const Vector x = tr.final_state.x.head(6);

    Matrix Aeq = Matrix::Ones(1, 6);
    Vector beq = Vector::Ones(1);
    Matrix Ain(16, 6);
    Vector bin(16);
    Ain.topRows(6) = -Matrix::Identity(6, 6);
    bin.head(6).setZero();
    Ain.middleRows(6, 6) = Matrix::Identity(6, 6);
    bin.segment(6, 6).setOnes();
    Ain.bottomRows(4) = p.saddle.D;
    bin.tail(4) = -p.saddle.b;
    const auto ref = oracle::qp_active_set_enumeration(d.cov, Vector::Zero(6), Aeq, beq, Ain, bin);
    ASSERT_TRUE(ref.has_value());
    EXPECT_NEAR(objective_portfolio(d.cov, x), ref->objective, 1e-8) << "r = " << r;
    EXPECT_NEAR(p.saddle.objective(x), ref->objective, 1e-8);

    EXPECT_NEAR(x.sum(), 1.0, 1e-6);
    EXPECT_GE(x.minCoeff(), -1e-6);
    EXPECT_LE(x.maxCoeff(), 1 + 1e-6);
    for (Index g = 0; g < 3; ++g) EXPECT_GE(x.segment(2 * g, 2).sum(), 0.3 - 1e-6);
    EXPECT_GE(d.means.dot(x), r - 1e-6);
    const KktResiduals k = kkt_residuals(p.saddle, tr.final_state.x);
    EXPECT_LE(k.stationarity, 1e-5);
    EXPECT_LE(k.complementarity, 1e-5);
  }
}

TEST(Portfolio, ObjectiveExamples) {
  EXPECT_EQ(objective_portfolio(Matrix::Identity(3, 3), Vector::Zero(3)), 0.0);
  EXPECT_DOUBLE_EQ(objective_portfolio(Matrix::Identity(3, 3), Vector::Unit(3, 0)), 0.5);
  EXPECT_THROW(objective_portfolio(Matrix::Identity(3, 3), Vector::Zero(2)), ArgumentError);
}

// --- custom problems --------------------------------------------------------------

TEST(CustomProblem, ParsesAllForms) {
  const SaddleProblem p = parse_custom_problem(R"({
    "primal_set": "capped_simplex",
    "H": [[2, 0], [0, 1]],
    "D": [[1, -1]], "b": [0.1],
    "x0": [0.5, 0.5]
  })");
  EXPECT_EQ(p.n, 2);
  EXPECT_EQ(p.q, 1);
  EXPECT_EQ(p.primal_set, PrimalSet::kCappedSimplex);
  EXPECT_NEAR(p.beta, 2.0, 1e-7);
  EXPECT_DOUBLE_EQ(p.objective(Vector::Ones(2)), 1.5);

  const SaddleProblem g = parse_custom_problem(R"({
    "primal_set": "free", "G": [[1, 0], [0, 3]], "h_offset": [1, 1], "D": [[0, 1]], "b": [0]
  })");
  EXPECT_NEAR(g.beta, 9.0, 1e-6);
  EXPECT_DOUBLE_EQ(g.objective(Vector::Zero(2)), 1.0);

  EXPECT_THROW(parse_custom_problem("{"), ParseError);
  EXPECT_THROW(parse_custom_problem(R"({"primal_set": "ball", "H": [[1]], "D": [[1]], "b": [0]})"), ParseError);
  EXPECT_THROW(parse_custom_problem(R"({"primal_set": "box", "H": [[1, 2]], "D": [[1]], "b": [0]})"), ParseError);
}
