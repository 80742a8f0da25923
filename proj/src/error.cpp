#include "bar/error.hpp"

namespace bar {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RowSumViolation: return "RowSumViolation";
    case ErrorKind::WeightBelowFloor: return "WeightBelowFloor";
    case ErrorKind::NoiseBelowFloor: return "NoiseBelowFloor";
    case ErrorKind::EmptyParentSet: return "EmptyParentSet";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::ExactTooLarge: return "ExactTooLarge";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DegenerateConditioning: return "DegenerateConditioning";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NotColumnSubstochastic: return "NotColumnSubstochastic";
    case ErrorKind::DegenerateCell: return "DegenerateCell";
    case ErrorKind::AllCellsEmpty: return "AllCellsEmpty";
    case ErrorKind::EmptyResult: return "EmptyResult";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IOError: return "IOError";
  }
  return "Unknown";
}

}  // namespace bar
