#pragma once

#include <stdexcept>
#include <string>

namespace qcal {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  config,     ///< invalid settings, prior/proposal mismatch (exit 2)
  domain,     ///< argument outside an operation's domain (exit 3)
  numerical,  ///< factorization or representability failure (exit 3)
  io,         ///< file access or parse failure (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::config:
        return 2;
      case ErrorKind::domain:
      case ErrorKind::numerical:
        return 3;
      case ErrorKind::io:
        return 4;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error(ErrorKind::numerical, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

/// Raised when a covariance cannot be factorized; carries the offending pivot.
struct DegenerateCovarianceError : NumericalError {
  DegenerateCovarianceError(const std::string& w, double pivot)
      : NumericalError(w), smallest_pivot(pivot) {}
  double smallest_pivot;
};

/// Raised when the requested Mercer rank underflows double precision.
struct RankReductionError : NumericalError {
  RankReductionError(const std::string& w, int max_rank)
      : NumericalError(w), max_usable_rank(max_rank) {}
  int max_usable_rank;
};

}  // namespace qcal
