#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace impulse {

// Failure categories. Each maps onto a stable CLI exit code: usage-level
// problems exit with 1, numerical/domain failures with 2.
enum class ErrorKind {
  Contract,              // dimension mismatch and similar caller mistakes
  Metric,                // mass matrix not symmetric positive definite
  DegenerateSurface,     // zero surface gradient
  DegenerateConstraint,  // stick rows rank deficient or not independent of the surface
  Rank,                  // singular KKT system in the projection oracle
  Grazing,               // no normal approach at the contact
  Contact,               // state off the surface or separating
  Configuration,         // configuration outside the model's domain
  UndefinedRatio,        // friction ratio with zero tangential part
  Domain,                // coefficient outside its admissible range
  Parse,                 // expression syntax error
  Evaluation,            // unbound variable, division by zero
  Schema,                // malformed scenario document
  UnknownModel,
  UnknownParameter,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Expression syntax errors carry the 1-based column of the offending token.
class ParseError : public Error {
 public:
  ParseError(std::size_t column, const std::string& message);

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace impulse
