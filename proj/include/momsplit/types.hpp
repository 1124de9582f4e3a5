#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace momsplit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Shape mismatch, out-of-range parameter, or otherwise malformed argument.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A supplied metric is not positive definite.
class MetricContractError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A combination of operators/metric for which no closed form is shipped.
class UnsupportedConfiguration : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A hypothesis of a step-size lemma does not hold.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A step-size condition required by a rate formula fails.
class ConditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Failure inside an iteration (e.g. a user-supplied evaluator threw).
class SolverError : public std::runtime_error {
 public:
  SolverError(std::size_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Malformed dataset file.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Dataset parsed but violates a mathematical requirement (e.g. covariance not PSD).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_same_size(const Vector& a, const Vector& b, const char* where) {
  if (a.size() != b.size()) {
    throw ArgumentError(std::string(where) + ": dimension mismatch (" +
                        std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace momsplit
