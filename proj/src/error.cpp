#include "ffal/error.hpp"

namespace ffal {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::LabelOutOfRange: return "label out of range";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::EmptyDataset: return "empty dataset";
    case ErrorCode::MissingLabels: return "missing labels";
    case ErrorCode::ExhaustedCandidates: return "exhausted candidates";
    case ErrorCode::PoolExhausted: return "pool exhausted";
    case ErrorCode::InfeasibleQuota: return "infeasible quota";
    case ErrorCode::EmptyCenters: return "empty centers";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::NotNormalized: return "probabilities not normalized";
    case ErrorCode::TooFewClasses: return "too few classes";
    case ErrorCode::EmptyTrainingSet: return "empty training set";
    case ErrorCode::Diverged: return "training diverged";
    case ErrorCode::NoHiddenRepresentation: return "no hidden representation";
    case ErrorCode::InfeasibleSeparation: return "infeasible separation";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::VersionMismatch: return "version mismatch";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::InvalidConfig: return "invalid config";
  }
  return "unknown";
}

}  // namespace ffal
