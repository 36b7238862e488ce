#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace d2dcache {

enum class ErrorKind {
  InvalidParameter,
  BoundViolation,
  CapacityViolation,
  DimensionMismatch,
  CapacityExceedsLibrary,
  UndefinedDistribution,
  QuadratureFailure,
  DomainError,
  DegenerateConfig,
  NoConvergence,
  InvalidSchedule,
  InvalidWindow,
  ConfigParse,
  UnknownFigure,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::BoundViolation: return "bound-violation";
    case ErrorKind::CapacityViolation: return "capacity-violation";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::CapacityExceedsLibrary: return "capacity-exceeds-library";
    case ErrorKind::UndefinedDistribution: return "undefined-distribution";
    case ErrorKind::QuadratureFailure: return "quadrature-failure";
    case ErrorKind::DomainError: return "domain-error";
    case ErrorKind::DegenerateConfig: return "degenerate-config";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::InvalidSchedule: return "invalid-schedule";
    case ErrorKind::InvalidWindow: return "invalid-window";
    case ErrorKind::ConfigParse: return "config-parse";
    case ErrorKind::UnknownFigure: return "unknown-figure";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (and tests) can dispatch on the category rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace d2dcache
