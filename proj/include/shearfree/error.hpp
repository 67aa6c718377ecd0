#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shearfree {

enum class ErrorKind {
  ZeroSubspace,
  DimensionMismatch,
  TangentAtInfinity,
  ChartBoundary,
  NotIncident,
  TangentDirection,
  NoChartIntersection,
  CausticReached,
  BlowUp,
  DegenerateCurve,
  IllConditioned,
  TransversalityViolation,
  FoliationFailure,
  ForcingDegree,
  SyntaxError,
  EvalError,
  ScenarioError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace shearfree
