#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairaudit {

enum class ErrorCode {
  // data
  MalformedRow,
  SplitLeak,
  DuplicateKey,
  UnknownAttribute,
  LengthMismatch,
  EmptyInput,
  UndefinedRate,
  GroupNotFound,
  SingleClassInput,
  TooManyDegenerateReplicates,
  DegenerateSample,
  OutOfRangeP,
  BadTemplate,
  DimensionMismatch,
  IoError,
  // config / usage
  InvalidArgument,
  // oracle / runtime
  OracleFailure,
  MissingEntry,
  NonFiniteScore,
  NonFiniteLoss,
  Divergence,
};

std::string_view to_string(ErrorCode code);

// Process exit code for the CLI: 1 config, 2 data, 3 oracle/runtime.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fairaudit
