#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parabolic {

enum class ErrorCode {
  InvalidArgument,
  GridMismatch,
  InvalidAxis,
  NotElliptic,
  DecayTooSmall,
  MethodMismatch,
  UnstableStep,
  TooManyModes,
  WindowTooSparse,
  Infeasible,
  ParseError,
  ValidationError,
  UnknownSuite,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base error for everything the library throws on a violated precondition
/// or a failed numerical check. The code identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Config text that could not be read. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& message)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " +
                                         std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// A config field that parsed but failed validation. `field` is the dotted path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message,
                  ErrorCode cause = ErrorCode::ValidationError)
      : Error(ErrorCode::ValidationError,
              field + ": " + (cause == ErrorCode::ValidationError
                                  ? message
                                  : std::string(to_string(cause)) + ": " + message)),
        field_(std::move(field)),
        cause_(cause) {}

  const std::string& field() const noexcept { return field_; }
  /// Underlying module error when the validation surfaced a precondition
  /// (e.g. DecayTooSmall); ValidationError otherwise.
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::string field_;
  ErrorCode cause_;
};

}  // namespace parabolic
