#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dreval/evidence.hpp"
#include "dreval/gateway.hpp"

namespace dreval {

namespace tool {
inline constexpr std::string_view kWebSearch = "web_search";
inline constexpr std::string_view kUrlFetch = "url_fetch";
inline constexpr std::string_view kArxiv = "arxiv";
inline constexpr std::string_view kGithub = "github";
}  // namespace tool

/// Tools an agent may be given. web_search and url_fetch are always present.
struct ToolRoster {
  std::set<std::string> available{std::string(tool::kWebSearch), std::string(tool::kUrlFetch),
                                  std::string(tool::kArxiv), std::string(tool::kGithub)};
  std::set<std::string> required{std::string(tool::kWebSearch), std::string(tool::kUrlFetch)};
};

struct TranscriptStep {
  int step = 0;
  std::string tool;  // tool id, or "rejected" for a refused final answer
  std::string input;
  std::string observation;
  std::vector<std::string> urls;  // normalized URLs surfaced by the step
};

json to_json(const TranscriptStep& s);
std::string render_transcript(const std::vector<TranscriptStep>& steps);

/// Executes tool calls for an agent against EvidenceTools.
class ToolBox {
 public:
  ToolBox(EvidenceTools& evidence, std::set<std::string> allowed, int max_results = 8,
          std::optional<Date> cutoff = std::nullopt);

  /// Never throws for tool failures; they become the observation text.
  TranscriptStep run(int step, const std::string& tool, const std::string& input);

  const std::set<std::string>& allowed() const { return allowed_; }

 private:
  EvidenceTools& evidence_;
  std::set<std::string> allowed_;
  int max_results_;
  std::optional<Date> cutoff_;
};

struct AgentSpec {
  std::string title;        // schema title
  std::string role_prompt;
  std::string task_prompt;  // fixed part of the user prompt
  json result_schema;       // payload of the "finish" action
  int step_budget = 20;
  /// Returns feedback text when a final answer must be redone.
  std::function<std::optional<std::string>(const json& result, const std::vector<TranscriptStep>&)> accept;
};

struct AgentOutcome {
  std::optional<json> result;  // nullopt when the budget ran out
  std::vector<TranscriptStep> transcript;
  int steps = 0;
};

/// Bounded plan/act loop: each step is one judged completion choosing a
/// tool call or "finish". Gateway errors propagate.
AgentOutcome run_agent(Gateway& gateway, ToolBox& tools, const AgentSpec& spec);

/// Schema of one agent step for the given tools and final payload.
json agent_step_schema(const std::string& title, const std::set<std::string>& tools, const json& result_schema);

}  // namespace dreval
