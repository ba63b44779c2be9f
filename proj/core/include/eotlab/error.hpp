#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eotlab {

enum class ErrorKind {
  Parameter,
  BoundViolation,
  DegenerateDomain,
  MarginTooLarge,
  OutOfDomain,
  NonConvergence,
  EmptySubset,
  InsufficientData,
  Method,
  Capacity,
  Internal,
  Resolution,
  DualityViolation,
  Precondition,
  Normalization,
  LogDomain,
  InstanceMismatch,
  Parse,
  Validation,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when Sinkhorn exhausts its iteration budget. Carries the residual
/// trace (one entry per full iteration) and the regularization at fault.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(double epsilon, std::vector<double> trace, const std::string& what)
      : Error(ErrorKind::NonConvergence, what), epsilon_(epsilon), trace_(std::move(trace)) {}

  double epsilon() const noexcept { return epsilon_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  double epsilon_;
  std::vector<double> trace_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter error";
    case ErrorKind::BoundViolation: return "bound-violation error";
    case ErrorKind::DegenerateDomain: return "degenerate-domain error";
    case ErrorKind::MarginTooLarge: return "margin-too-large error";
    case ErrorKind::OutOfDomain: return "domain error";
    case ErrorKind::NonConvergence: return "non-convergence error";
    case ErrorKind::EmptySubset: return "empty-subset error";
    case ErrorKind::InsufficientData: return "insufficient-data error";
    case ErrorKind::Method: return "method error";
    case ErrorKind::Capacity: return "capacity error";
    case ErrorKind::Internal: return "internal error";
    case ErrorKind::Resolution: return "resolution error";
    case ErrorKind::DualityViolation: return "duality-violation error";
    case ErrorKind::Precondition: return "precondition error";
    case ErrorKind::Normalization: return "normalization error";
    case ErrorKind::LogDomain: return "log-domain error";
    case ErrorKind::InstanceMismatch: return "instance error";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Io: return "io error";
  }
  return "error";
}

}  // namespace eotlab
