// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slicetopo {

enum class ErrorCode {
  kUnknownInstance,
  kEmptyCloud,
  kParseError,
  kIoError,
  kDegenerateCloud,
  kEmptySlice,
  kInvalidParams,
  kTooManySlices,
  kInsufficientData,
  kDimensionMismatch,
  kUnreachableFraction,
  kVersionMismatch,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownInstance: return "UnknownInstance";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kDegenerateCloud: return "DegenerateCloud";
    case ErrorCode::kEmptySlice: return "EmptySlice";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kTooManySlices: return "TooManySlices";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUnreachableFraction: return "UnreachableFraction";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

/// Base error for every failure surfaced by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Text-format failure; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace slicetopo
