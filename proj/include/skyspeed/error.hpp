#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace skyspeed {

enum class ErrorCode {
  DegenerateConfiguration,
  PointAtInfinity,
  SingularMatrix,
  InvalidCount,
  InvalidArgument,
  MalformedRecord,
  MissingHeader,
  NonMonotonicFrames,
  InsufficientHistory,
  InvalidLaneMap,
  WrongMode,
  EmptyInput,
  LengthMismatch,
  DuplicateKey,
  InvalidSpec,
  InvalidConfig,
  BehindCamera,
  Io,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library. `line()` is set for stream and
/// file parsing errors (1-based).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace skyspeed
