#include "fairaudit/error.hpp"

namespace fairaudit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::SplitLeak: return "SplitLeak";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UndefinedRate: return "UndefinedRate";
    case ErrorCode::GroupNotFound: return "GroupNotFound";
    case ErrorCode::SingleClassInput: return "SingleClassInput";
    case ErrorCode::TooManyDegenerateReplicates: return "TooManyDegenerateReplicates";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::OutOfRangeP: return "OutOfRangeP";
    case ErrorCode::BadTemplate: return "BadTemplate";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::MissingEntry: return "MissingEntry";
    case ErrorCode::NonFiniteScore: return "NonFiniteScore";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::Divergence: return "Divergence";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return 1;
    case ErrorCode::OracleFailure:
    case ErrorCode::MissingEntry:
    case ErrorCode::NonFiniteScore:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::Divergence:
      return 3;
    default:
      return 2;
  }
}

}  // namespace fairaudit
