#pragma once

#include <stdexcept>
#include <string>

namespace spgnn {

enum class ErrorCode {
  MissingFile,
  MalformedRow,
  UnknownApi,
  EmptyLabelSet,
  InsufficientSamplesForApi,
  UnwritableOutput,
  InvalidSpec,
  InconsistentDimension,
  EmptyTable,
  InvalidSize,
  ShapeMismatch,
  WrongInputSize,
  DimensionMismatch,
  NonFiniteInput,
  NegativeAlpha,
  NoPositives,
  VocabularyMismatch,
  UnmappableApi,
  NonFiniteLoss,
  UnreadableImage,
  BadK,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

/// Domain error carrying a machine-checkable code. The CLI maps codes to
/// exit status and prints the code name so callers can script against it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace spgnn
