#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dreval/config.hpp"
#include "dreval/evidence.hpp"
#include "dreval/gateway.hpp"
#include "dreval/protocol.hpp"
#include "dreval/workflow.hpp"

namespace dreval {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitFatal = 1, kExitPartial = 2 };

struct AppContext {
  RunConfig config;
  /// Judge used in live/record mode; built from config.provider when null.
  std::shared_ptr<CompletionBackend> backend;
  /// Evidence backends; built from config.evidence when null.
  std::shared_ptr<SearchBackend> search;
  std::shared_ptr<PageSource> pages;
  std::ostream* out = nullptr;  // human-readable output (tables, inspect)
};

struct TaskSpec {
  std::string task_id;
  std::string query;
  std::optional<std::filesystem::path> report;
};

/// A JSON manifest {"version":1,"tasks":[{task_id, query, report?}]} with
/// report paths relative to the manifest, or a plain-text file holding one
/// query whose task id is the file stem.
std::vector<TaskSpec> load_tasks(const std::filesystem::path& file);

struct CommandResult {
  int exit_code = kExitOk;
  std::string run_id;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> errors;
};

std::filesystem::path protocol_path(const RunConfig& c, std::string_view task_id);
std::filesystem::path scorecard_path(const RunConfig& c, std::string_view task_id);
std::filesystem::path audit_path(const RunConfig& c, std::string_view task_id);

ProtocolOptions protocol_options(const RunConfig& c);
WorkflowOptions workflow_options(const RunConfig& c);

/// run_id: first 16 hex digits of SHA-256 over the command line, the
/// config snapshot and the input digests.
std::string make_run_id(std::string_view command, const json& config, const json& inputs);

inline const std::set<std::string> kAllMetrics{"wq", "factuality", "ci", "da", "kic", "rq"};
std::set<std::string> parse_metric_filter(std::string_view csv);

CommandResult cmd_protocol_create(const AppContext& ctx, const std::filesystem::path& tasks_file);
CommandResult cmd_evaluate(const AppContext& ctx, const std::filesystem::path& tasks_file,
                           const std::set<std::string>& metrics);
CommandResult cmd_score(const AppContext& ctx, const std::filesystem::path& scorecard_dir);

struct SweepArgs {
  std::filesystem::path pair_file;
  std::vector<double> grid;  // empty: default grid
  std::size_t n = 15;
  bool oracle = true;
  std::optional<std::uint64_t> seed;
};

CommandResult cmd_sweep(const AppContext& ctx, const SweepArgs& args);
CommandResult cmd_inspect(const std::filesystem::path& artifact, std::ostream& out);

}  // namespace dreval
