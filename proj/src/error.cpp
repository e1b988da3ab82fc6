#include "dreval/error.hpp"

namespace dreval {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::MalformedUrl: return "MalformedUrl";
    case Errc::UnknownSuffix: return "UnknownSuffix";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::AttemptsExhausted: return "AttemptsExhausted";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::RateLimited: return "RateLimited";
    case Errc::FixtureMiss: return "FixtureMiss";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::PlanToolMismatch: return "PlanToolMismatch";
    case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::EmptyReport: return "EmptyReport";
    case Errc::PreconditionViolation: return "PreconditionViolation";
    case Errc::EmptyChecklist: return "EmptyChecklist";
    case Errc::EmptyResults: return "EmptyResults";
    case Errc::EmptyTaskSet: return "EmptyTaskSet";
    case Errc::FormatError: return "FormatError";
    case Errc::DegenerateBaseline: return "DegenerateBaseline";
    case Errc::MissingProtocol: return "MissingProtocol";
    case Errc::ConfigError: return "ConfigError";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dreval
