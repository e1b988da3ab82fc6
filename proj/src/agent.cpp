#include "dreval/agent.hpp"

#include <sstream>

#include "dreval/error.hpp"
#include "dreval/url.hpp"

namespace dreval {
namespace {

constexpr std::size_t kFetchObservationChars = 4000;

std::string normalized_or_raw(const std::string& url) {
  try {
    return normalize_url(url);
  } catch (const Error&) {
    return url;
  }
}

}  // namespace

json to_json(const TranscriptStep& s) {
  return {{"step", s.step}, {"tool", s.tool}, {"input", s.input}, {"observation", s.observation}, {"urls", s.urls}};
}

std::string render_transcript(const std::vector<TranscriptStep>& steps) {
  if (steps.empty()) return "(no steps yet)\n";
  std::ostringstream out;
  for (const auto& s : steps) {
    out << "[step " << s.step << "] " << s.tool;
    if (!s.input.empty()) out << ": " << s.input;
    out << "\n<<<\n" << s.observation << "\n>>>\n";
  }
  return out.str();
}

ToolBox::ToolBox(EvidenceTools& evidence, std::set<std::string> allowed, int max_results, std::optional<Date> cutoff)
    : evidence_(evidence), allowed_(std::move(allowed)), max_results_(max_results), cutoff_(cutoff) {}

TranscriptStep ToolBox::run(int step, const std::string& tool, const std::string& input) {
  TranscriptStep out{step, tool, input, "", {}};
  if (!allowed_.contains(tool)) {
    out.observation = "error: tool \"" + tool + "\" is not available";
    return out;
  }
  try {
    if (tool == tool::kUrlFetch) {
      const auto doc = evidence_.fetch(input);
      out.urls.push_back(normalize_url(input));
      if (doc.status == FetchStatus::Ok) {
        out.observation = doc.content_text.size() > kFetchObservationChars
                              ? doc.content_text.substr(0, kFetchObservationChars) + " ..."
                              : doc.content_text;
      } else {
        out.observation = "fetch failed: " + std::string(to_string(doc.status));
      }
      return out;
    }
    std::string query = input;
    if (tool == tool::kArxiv) query = "site:arxiv.org " + input;
    if (tool == tool::kGithub) query = "site:github.com " + input;
    const auto results = evidence_.search(SearchQuery{query, cutoff_, max_results_});
    std::ostringstream obs;
    if (results.empty()) obs << "no results";
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      out.urls.push_back(normalized_or_raw(r.url));
      obs << i + 1 << ". " << r.url << " | " << r.title << " | "
          << (r.published_date ? r.published_date->to_string() : "undated") << "\n   " << r.snippet << "\n";
    }
    out.observation = obs.str();
  } catch (const Error& e) {
    out.observation = std::string("tool error: ") + e.what();
  }
  return out;
}

json agent_step_schema(const std::string& title, const std::set<std::string>& tools, const json& result_schema) {
  json actions = json::array();
  for (const auto& t : tools) actions.push_back(t);
  actions.push_back("finish");
  return {
      {"title", title},
      {"type", "object"},
      {"required", {"action"}},
      {"properties",
       {{"thought", {{"type", "string"}}},
        {"action", {{"type", "string"}, {"enum", actions}}},
        {"input", {{"type", "string"}}},
        {"result", result_schema}}},
  };
}

AgentOutcome run_agent(Gateway& gateway, ToolBox& tools, const AgentSpec& spec) {
  AgentOutcome outcome;
  const auto schema = agent_step_schema(spec.title, tools.allowed(), spec.result_schema);
  for (int step = 1; step <= spec.step_budget; ++step) {
    outcome.steps = step;
    JudgeRequest req;
    req.role_prompt = spec.role_prompt;
    req.user_prompt = spec.task_prompt + "\n### STEP\n" + std::to_string(step) + " of " +
                      std::to_string(spec.step_budget) + "\n### TRANSCRIPT\n" + render_transcript(outcome.transcript);
    req.output_schema = schema;
    const auto reply = gateway.complete_structured(req).payload;
    const auto action = reply.at("action").get<std::string>();
    if (action == "finish") {
      if (!reply.contains("result")) {
        outcome.transcript.push_back({step, "rejected", "", "finish requires a \"result\" object", {}});
        continue;
      }
      auto feedback = spec.accept ? spec.accept(reply["result"], outcome.transcript) : std::nullopt;
      if (!feedback) {
        outcome.result = reply["result"];
        return outcome;
      }
      outcome.transcript.push_back({step, "rejected", "", *feedback, {}});
      continue;
    }
    outcome.transcript.push_back(tools.run(step, action, reply.value("input", std::string())));
  }
  return outcome;
}

}  // namespace dreval
