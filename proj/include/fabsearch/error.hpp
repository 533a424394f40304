#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fabsearch {

enum class ErrorCode {
  MalformedFile,
  EmptyMesh,
  SchemaError,
  DegenerateGeometry,
  DomainError,
  ShapeMismatch,
  DuplicateId,
  DimensionMismatch,
  CorruptIndex,
  TooFewRecords,
  UnknownPart,
  InvalidParams,
  DegenerateData,
  UnservableProcess,
  IoError,
  PayloadTooLarge,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// the CLI and the HTTP layer can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fabsearch
