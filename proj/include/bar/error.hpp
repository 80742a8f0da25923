#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bar {

enum class ErrorKind {
  // model
  RowSumViolation,
  WeightBelowFloor,
  NoiseBelowFloor,
  EmptyParentSet,
  DuplicateEdge,
  InvalidParameter,
  Infeasible,
  DegreeTooLarge,
  // simulate
  ParameterOutOfRange,
  ExactTooLarge,
  // exactchain
  TooLarge,
  DegenerateConditioning,
  SingularSystem,
  // bounds
  NotColumnSubstochastic,
  // infer
  DegenerateCell,
  AllCellsEmpty,
  EmptyResult,
  // harness
  ParseError,
  UnknownNode,
  ConfigError,
  IOError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every library failure is reported through this type; `kind()` carries the
/// machine-readable category so callers (CLI exit codes, sweep rows) can
/// dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bar
