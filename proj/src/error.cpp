#include "shearfree/error.hpp"

namespace shearfree {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroSubspace: return "ZeroSubspace";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TangentAtInfinity: return "TangentAtInfinity";
    case ErrorKind::ChartBoundary: return "ChartBoundary";
    case ErrorKind::NotIncident: return "NotIncident";
    case ErrorKind::TangentDirection: return "TangentDirection";
    case ErrorKind::NoChartIntersection: return "NoChartIntersection";
    case ErrorKind::CausticReached: return "CausticReached";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::DegenerateCurve: return "DegenerateCurve";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::TransversalityViolation: return "TransversalityViolation";
    case ErrorKind::FoliationFailure: return "FoliationFailure";
    case ErrorKind::ForcingDegree: return "ForcingDegree";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::EvalError: return "EvalError";
    case ErrorKind::ScenarioError: return "ScenarioError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace shearfree
