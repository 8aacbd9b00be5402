#include "spgnn/errors.hpp"

namespace spgnn {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnknownApi: return "UnknownApi";
    case ErrorCode::EmptyLabelSet: return "EmptyLabelSet";
    case ErrorCode::InsufficientSamplesForApi: return "InsufficientSamplesForApi";
    case ErrorCode::UnwritableOutput: return "UnwritableOutput";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InconsistentDimension: return "InconsistentDimension";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::WrongInputSize: return "WrongInputSize";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NegativeAlpha: return "NegativeAlpha";
    case ErrorCode::NoPositives: return "NoPositives";
    case ErrorCode::VocabularyMismatch: return "VocabularyMismatch";
    case ErrorCode::UnmappableApi: return "UnmappableApi";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::UnreadableImage: return "UnreadableImage";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace spgnn
