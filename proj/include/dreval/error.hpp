#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dreval {

enum class Errc {
  EmptyInput,
  MalformedUrl,
  UnknownSuffix,
  SchemaViolation,
  AttemptsExhausted,
  BackendUnavailable,
  RateLimited,
  FixtureMiss,
  BudgetExhausted,
  PlanToolMismatch,
  SchemaVersionMismatch,
  CorruptFile,
  EmptyReport,
  PreconditionViolation,
  EmptyChecklist,
  EmptyResults,
  EmptyTaskSet,
  FormatError,
  DegenerateBaseline,
  MissingProtocol,
  ConfigError,
  Io,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace dreval
