#include "mtpath/errors.hpp"

namespace mtpath {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDirection: return "MalformedDirection";
    case ErrorCode::UnbalancedMarkup: return "UnbalancedMarkup";
    case ErrorCode::NestedMarkup: return "NestedMarkup";
    case ErrorCode::EmptySpan: return "EmptySpan";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::MissingInput: return "MissingInput";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::UnknownDetector: return "UnknownDetector";
    case ErrorCode::DegenerateMass: return "DegenerateMass";
    case ErrorCode::EmptyReferenceSet: return "EmptyReferenceSet";
    case ErrorCode::InsufficientCalibrationData: return "InsufficientCalibrationData";
    case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::OrphanWord: return "OrphanWord";
    case ErrorCode::TooFewGroups: return "TooFewGroups";
    case ErrorCode::NonBinaryLabels: return "NonBinaryLabels";
    case ErrorCode::ConstantFeature: return "ConstantFeature";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::NoEvaluableDirections: return "NoEvaluableDirections";
    case ErrorCode::NotEnoughRecords: return "NotEnoughRecords";
    case ErrorCode::MissingScores: return "MissingScores";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Error";
}

}  // namespace mtpath
