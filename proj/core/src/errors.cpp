#include "impulse/errors.hpp"

namespace impulse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Metric: return "metric";
    case ErrorKind::DegenerateSurface: return "degenerate-surface";
    case ErrorKind::DegenerateConstraint: return "degenerate-constraint";
    case ErrorKind::Rank: return "rank";
    case ErrorKind::Grazing: return "grazing";
    case ErrorKind::Contact: return "contact";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::UndefinedRatio: return "undefined-ratio";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::UnknownModel: return "unknown-model";
    case ErrorKind::UnknownParameter: return "unknown-parameter";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

ParseError::ParseError(std::size_t column, const std::string& message)
    : Error(ErrorKind::Parse, "column " + std::to_string(column) + ": " + message),
      column_(column) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace impulse
