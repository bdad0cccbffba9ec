#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mtpath {

enum class ErrorCode {
  MalformedDirection,
  UnbalancedMarkup,
  NestedMarkup,
  EmptySpan,
  IoError,
  SchemaError,
  Validation,
  MissingInput,
  ZeroVector,
  UnknownDetector,
  DegenerateMass,
  EmptyReferenceSet,
  InsufficientCalibrationData,
  DegenerateCalibration,
  OrphanWord,
  TooFewGroups,
  NonBinaryLabels,
  ConstantFeature,
  DidNotConverge,
  MissingFeature,
  DegenerateLabels,
  NoEvaluableDirections,
  NotEnoughRecords,
  MissingScores,
  InvalidSpec,
  InvalidConfig,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Aggregated record-validation failure; violations are "field: rule" strings.
class ValidationFailure : public Error {
 public:
  ValidationFailure(std::string context, std::vector<std::string> violations)
      : Error(ErrorCode::Validation, context + ": " + join(violations)),
        context_(std::move(context)),
        violations_(std::move(violations)) {}

  const std::string& context() const { return context_; }
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
      if (!out.empty()) out += "; ";
      out += p;
    }
    return out;
  }

  std::string context_;
  std::vector<std::string> violations_;
};

}  // namespace mtpath
