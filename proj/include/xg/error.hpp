#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xg {

enum class ErrorCode {
  MissingColumn,
  BadValue,
  EmptyFile,
  OutOfRange,
  Degenerate,
  SchemaMismatch,
  DegenerateClass,
  InsufficientData,
  LeakedTestRows,
  PayloadNotFound,
  MalformedJson,
  UnknownEnum,
  HttpError,
  EmptyTable,
  SchemaVersionMismatch,
  CorruptModel,
  LengthMismatch,
  SingleClass,
  EmptyInput,
  UnknownFeature,
  ConstantFeature,
  EmptyGroup,
  OutOfGrid,
  ZeroBaseline,
  MixedMatches,
  MixedPlayers,
  IoError,
  ConfigError,
  Locked,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::DegenerateClass: return "DegenerateClass";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::LeakedTestRows: return "LeakedTestRows";
    case ErrorCode::PayloadNotFound: return "PayloadNotFound";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::UnknownEnum: return "UnknownEnum";
    case ErrorCode::HttpError: return "HttpError";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::ConstantFeature: return "ConstantFeature";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::MixedMatches: return "MixedMatches";
    case ErrorCode::MixedPlayers: return "MixedPlayers";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::Locked: return "Locked";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as an Error carrying a typed code.
/// `detail` holds the code-specific number (row index, HTTP status, byte
/// offset) when one applies, otherwise -1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::int64_t detail = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(detail),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  std::int64_t detail() const noexcept { return detail_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::int64_t detail_;
  std::string message_;
};

}  // namespace xg
