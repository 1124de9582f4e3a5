#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "momsplit/algorithm.hpp"
#include "momsplit/conditions.hpp"
#include "momsplit/problems.hpp"
#include "momsplit/solvers.hpp"

namespace momsplit::cli {

enum ExitCode : int {
  kOk = 0,
  kInfeasible = 1,
  kDiverged = 2,
  kIoError = 3,
  kCertificateViolation = 4,
};

struct RunConfig {
  std::string command;
  std::string problem = "qp";
  long m = 50;
  long q = 10;
  std::uint64_t seed = 1;
  int repeat = 1;
  int jobs = 1;
  std::string dataset;
  std::string dataset_format = "auto";
  std::string problem_file;
  double r = 0.001;
  std::vector<long> groups;
  std::vector<std::string> algs{"alg1"};
  std::string gamma = "auto";
  double gamma_fraction = 0.95;
  std::string kernel = "classic";
  std::optional<double> L;
  double eps = 1e-6;
  std::optional<double> eps1, eps2, eps3, eps4, eps5, eps6, eps7, eps8, alpha;
  double rho = 0.0;
  double tol = 1e-6;
  long max_iter = 100000;
  double ref_tol = 1e-13;
  std::optional<long> ref_max_iter;
  bool cert = false;
  std::string out;
  bool strict = false;
  bool timing = false;
};

/// Everything needed to run one algorithm on one problem instance.
struct AlgorithmSetup {
  Algorithm algorithm = Algorithm::kAlg1;
  ConstantSet constants;
  double gamma = 0.0;
  std::optional<MaxGamma> max_gamma;
  OperatorTriple triple;
  std::optional<FourOperatorSplit> split;
  SolverConfig solver;
};

/// Builds the problem named in the config for the given seed.
SaddleProblem build_problem(const RunConfig& cfg, std::uint64_t seed);

/// Resolves constants, kernel and step size. Throws ConditionError when
/// gamma is "auto" and no feasible step size exists.
AlgorithmSetup setup_algorithm(Algorithm a, const SaddleProblem& p, const RunConfig& cfg);

/// Entry point shared by the executable and the tests.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace momsplit::cli
