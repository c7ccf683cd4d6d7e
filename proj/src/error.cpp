#include "langmem/error.hpp"

namespace langmem {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::RankError: return "RankError";
    case ErrorCode::NumericalError: return "NumericalError";
    case ErrorCode::DegenerateProjection: return "DegenerateProjection";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DegenerateSmoothness: return "DegenerateSmoothness";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidSubgraph: return "InvalidSubgraph";
    case ErrorCode::InsufficientGroups: return "InsufficientGroups";
    case ErrorCode::LanguageSetMismatch: return "LanguageSetMismatch";
    case ErrorCode::WrongArchitecture: return "WrongArchitecture";
    case ErrorCode::MissingLogprobs: return "MissingLogprobs";
    case ErrorCode::RejectedMetric: return "RejectedMetric";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace langmem
