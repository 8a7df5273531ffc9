#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gemini {

enum class Errc {
  // ecs
  DuplicateName,
  UnknownEntity,
  DuplicateComponent,
  MissingComponent,
  AmbiguousTime,
  IdentityMutation,
  // config
  SyntaxError,
  UnknownSection,
  UnknownCommandKind,
  UnknownCommand,
  InvalidInvocation,
  ImportCycle,
  MissingImport,
  NameCollision,
  UnknownModulePath,
  UnknownAttribute,
  AttributeTypeMismatch,
  InitializerFailure,
  // statelog
  UnsupportedType,
  FormatError,
  // scene
  ParseError,
  NonTriangleFace,
  IndexOutOfRange,
  InvalidDimension,
  DegenerateFace,
  InvalidMesh,
  // motion
  DegenerateSegment,
  InvalidSpeed,
  InvalidTrajectory,
  NonMonotonicTimestamps,
  NonStationaryCoefficients,
  // lidar
  EmptyPattern,
  NonPositiveInput,
  ReflectivityOutOfRange,
  GrazingAngle,
  NonPositiveRange,
  InvalidArgument,
  // io
  Io,
  WriteError,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::UnknownEntity: return "UnknownEntity";
    case Errc::DuplicateComponent: return "DuplicateComponent";
    case Errc::MissingComponent: return "MissingComponent";
    case Errc::AmbiguousTime: return "AmbiguousTime";
    case Errc::IdentityMutation: return "IdentityMutation";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownSection: return "UnknownSection";
    case Errc::UnknownCommandKind: return "UnknownCommandKind";
    case Errc::UnknownCommand: return "UnknownCommand";
    case Errc::InvalidInvocation: return "InvalidInvocation";
    case Errc::ImportCycle: return "ImportCycle";
    case Errc::MissingImport: return "MissingImport";
    case Errc::NameCollision: return "NameCollision";
    case Errc::UnknownModulePath: return "UnknownModulePath";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::AttributeTypeMismatch: return "AttributeTypeMismatch";
    case Errc::InitializerFailure: return "InitializerFailure";
    case Errc::UnsupportedType: return "UnsupportedType";
    case Errc::FormatError: return "FormatError";
    case Errc::ParseError: return "ParseError";
    case Errc::NonTriangleFace: return "NonTriangleFace";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::InvalidDimension: return "InvalidDimension";
    case Errc::DegenerateFace: return "DegenerateFace";
    case Errc::InvalidMesh: return "InvalidMesh";
    case Errc::DegenerateSegment: return "DegenerateSegment";
    case Errc::InvalidSpeed: return "InvalidSpeed";
    case Errc::InvalidTrajectory: return "InvalidTrajectory";
    case Errc::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case Errc::NonStationaryCoefficients: return "NonStationaryCoefficients";
    case Errc::EmptyPattern: return "EmptyPattern";
    case Errc::NonPositiveInput: return "NonPositiveInput";
    case Errc::ReflectivityOutOfRange: return "ReflectivityOutOfRange";
    case Errc::GrazingAngle: return "GrazingAngle";
    case Errc::NonPositiveRange: return "NonPositiveRange";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "Io";
    case Errc::WriteError: return "WriteError";
  }
  return "Unknown";
}

/// Errors that originate from configuration content rather than from the
/// environment or from running processors.
constexpr bool is_config_error(Errc code) {
  switch (code) {
    case Errc::Io:
    case Errc::WriteError:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  Error(Errc code, const std::string& message, int line, int column = 0)
      : std::runtime_error(std::string(to_string(code)) + " at line " + std::to_string(line) +
                           (column > 0 ? ", column " + std::to_string(column) : std::string()) +
                           ": " + message),
        code_(code),
        message_(message),
        line_(line),
        column_(column) {}

  Errc code() const noexcept { return code_; }
  /// The message without the error-code prefix or location.
  const std::string& message() const noexcept { return message_; }
  std::optional<int> line() const noexcept { return line_; }
  std::optional<int> column() const noexcept { return column_; }

 private:
  Errc code_;
  std::string message_;
  std::optional<int> line_;
  std::optional<int> column_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace gemini
