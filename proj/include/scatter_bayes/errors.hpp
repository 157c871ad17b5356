#pragma once

#include <stdexcept>
#include <string>

namespace scatter_bayes {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forward solver failure, e.g. a numerically singular Nystrom system (CLI exit code 3).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double rcond = 0.0)
      : std::runtime_error(what), rcond_(rcond) {}

  /// Reciprocal condition estimate of the system that failed.
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// A star-shaped boundary left the admissible set (r >= r_max or non-finite).
class InvalidShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Markov chain could not continue (CLI exit code 4).
class ChainAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries line/field context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scatter_bayes
