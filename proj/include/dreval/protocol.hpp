#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "dreval/agent.hpp"
#include "dreval/date.hpp"

namespace dreval {

struct Grounding {
  std::string url;
  std::string snippet;
  bool operator==(const Grounding&) const = default;
};

struct KicItem {
  std::string question;  // answerable yes/no
  std::vector<Grounding> grounding;
  double weight = 1.0;
  bool operator==(const KicItem&) const = default;
};

struct ValidationPlan {
  std::string extract_step;
  std::string verify_step;
  std::string compare_step;
  std::vector<std::string> verify_tools;  // tools the verify step relies on
  bool operator==(const ValidationPlan&) const = default;
};

struct RqItem {
  std::string question;
  ValidationPlan plan;
  std::vector<Grounding> grounding;
  bool operator==(const RqItem&) const = default;
};

inline constexpr int kProtocolVersion = 1;
inline constexpr std::array<std::string_view, 4> kStaticMetrics{"wq", "factuality", "ci", "da"};

struct Protocol {
  std::string task_id;
  std::string query;
  std::string created_at;
  std::set<std::string> tools_selected;
  std::vector<KicItem> kic_items;
  std::vector<RqItem> rq_items;
  std::string run_id;
  bool operator==(const Protocol&) const = default;
};

struct ProtocolOptions {
  Date today;
  int min_kic = 8;
  int max_kic = 16;
  int min_rq = 3;
  int max_rq = 6;
  int step_budget = 20;
  int search_results = 8;
};

/// One judged call picking optional tools. Always includes web_search and
/// url_fetch; a SchemaViolation falls back to those two.
std::set<std::string> select_tools(Gateway& gateway, std::string_view query, Date today,
                                   const ToolRoster& roster = {});

struct KicCreation {
  std::vector<KicItem> items;
  std::vector<TranscriptStep> transcript;
  int steps = 0;
};

struct RqCreation {
  std::vector<RqItem> items;
  std::vector<TranscriptStep> transcript;
  int steps = 0;
};

/// Throws BudgetExhausted when no acceptable checklist exists within the
/// step budget, and PreconditionViolation when `evidence` applies a cutoff.
KicCreation create_kic(Gateway& gateway, EvidenceTools& evidence, std::string_view query,
                       const std::set<std::string>& tools, const ProtocolOptions& options);

/// As create_kic. A plan naming an unselected tool is sent back once; a
/// second offence throws PlanToolMismatch.
RqCreation create_rq(Gateway& gateway, EvidenceTools& evidence, std::string_view query,
                     const std::set<std::string>& tools, const ProtocolOptions& options);

/// select_tools + create_kic + create_rq.
Protocol create_protocol(Gateway& gateway, EvidenceTools& evidence, std::string task_id, std::string query,
                         const ProtocolOptions& options);

/// Checks the structural invariants; returns a description of the first
/// violation.
std::optional<std::string> protocol_violation(const Protocol& p);

json to_json(const Protocol& p);
/// Throws SchemaVersionMismatch or CorruptFile.
Protocol protocol_from_json(const json& j);
void save_protocol(const Protocol& p, const std::filesystem::path& file);
Protocol load_protocol(const std::filesystem::path& file);

}  // namespace dreval
