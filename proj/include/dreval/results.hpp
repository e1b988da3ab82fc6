#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dreval/schema.hpp"
#include "dreval/scoring.hpp"

namespace dreval {

inline constexpr int kScorecardVersion = 1;

/// {version, run_id, task_id, scores{...}, diagnostics{...}}; Undefined is null.
json to_json(const Scorecard& s);
/// Throws SchemaVersionMismatch or CorruptFile.
Scorecard scorecard_from_json(const json& j);
Scorecard load_scorecard(const std::filesystem::path& file);

/// Files named *.scorecard.json directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> scorecard_files(const std::filesystem::path& dir);

json aggregate_to_json(const AggregateScorecard& a, const std::string& run_id);

/// Fixed-width table: one row per task plus the aggregate row, x100.
std::string format_table(const std::vector<Scorecard>& tasks, const AggregateScorecard& aggregate);

}  // namespace dreval
