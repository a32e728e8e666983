#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace clindiag {

enum class ErrorCode {
  // encoding
  MissingColumn,
  MissingValue,
  UnknownStage,
  NonNumericCell,
  NonFiniteValue,
  UnknownLabelValue,
  InvalidSchema,
  AlreadyStandardized,
  DatasetTooSmall,
  EmptyDataset,
  // qp / svm
  InvalidProblem,
  DegenerateProblem,
  InstanceTooLarge,
  DimensionMismatch,
  SingleClassDataset,
  ZeroWeightVector,
  InvalidArgument,
  // persistence
  IoFailure,
  VersionMismatch,
  CorruptModel,
  ParseError,
  // metrics / report
  EmptyMatrix,
  EmptyRegistry,
};

/// Exception carrying a machine-checkable code. `record` is set when the
/// failure can be attributed to one input row.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> record = std::nullopt)
      : std::runtime_error(message), code_(code), record_(record) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> record() const noexcept { return record_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> record_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::UnknownStage: return "UnknownStage";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::UnknownLabelValue: return "UnknownLabelValue";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::AlreadyStandardized: return "AlreadyStandardized";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidProblem: return "InvalidProblem";
    case ErrorCode::DegenerateProblem: return "DegenerateProblem";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::ZeroWeightVector: return "ZeroWeightVector";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::EmptyRegistry: return "EmptyRegistry";
  }
  return "Unknown";
}

}  // namespace clindiag
