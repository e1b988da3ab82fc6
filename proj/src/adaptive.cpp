#include "dreval/adaptive.hpp"

#include <array>
#include <sstream>

#include "dreval/error.hpp"
#include "dreval/parallel.hpp"
#include "dreval/scoring.hpp"

namespace dreval {
namespace {

constexpr std::array<std::string_view, 4> kFaultNames{"unsupported_causal_claim", "circular_argument",
                                                      "ignored_counter_evidence", "minor_gap"};

json fault_enum() {
  json arr = json::array();
  for (auto n : kFaultNames) arr.push_back(n);
  return {{"type", "string"}, {"enum", arr}};
}

json rq_result_schema() {
  return {{"type", "object"},
          {"required", {"deductions", "summary"}},
          {"properties",
           {{"deductions",
             {{"type", "array"},
              {"items",
               {{"type", "object"},
                {"required", {"fault", "reason"}},
                {"properties", {{"fault", fault_enum()}, {"reason", {{"type", "string"}, {"minLength", 1}}}}}}}}},
            {"summary", {{"type", "string"}}}}}};
}

std::string report_block(const Report& report) { return "### REPORT\n<<<\n" + report.body + "\n>>>\n"; }

const char* kRqRole =
    "You audit the reasoning of a research report by following a validation plan. First extract the reasoning "
    "chain the plan asks for from the report. Then run the external checks with the tools. Then compare the two "
    "using the plan's criteria. When done, finish with the faults you found. Each fault costs a fixed number of "
    "points from a starting score of 10: unsupported_causal_claim 3, circular_argument 3, "
    "ignored_counter_evidence 2, minor_gap 1. List each distinct fault once with a specific reason. "
    "Reply with one JSON object per step: either a tool action with its input, or action \"finish\" with the result.";

std::vector<RqDeduction> deductions_from(const json& result) {
  std::vector<RqDeduction> out;
  for (const auto& d : result.at("deductions")) {
    const auto fault = *parse_rq_fault(d.at("fault").get<std::string>());
    out.push_back({std::string(to_string(fault)) + ": " + d.at("reason").get<std::string>(), deduction_points(fault)});
  }
  return out;
}

}  // namespace

std::string_view to_string(RqFault f) noexcept { return kFaultNames[static_cast<std::size_t>(f)]; }

std::optional<RqFault> parse_rq_fault(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kFaultNames.size(); ++i) {
    if (kFaultNames[i] == s) return static_cast<RqFault>(i);
  }
  return std::nullopt;
}

int deduction_points(RqFault f) noexcept {
  switch (f) {
    case RqFault::UnsupportedCausalClaim:
    case RqFault::CircularArgument:
      return 3;
    case RqFault::IgnoredCounterEvidence:
      return 2;
    case RqFault::MinorGap:
      return 1;
  }
  return 0;
}

WqScores evaluate_wq(Gateway& gateway, const Report& report, std::size_t workers) {
  const auto rubric = wq_rubric();
  auto dims = parallel_map(rubric.size(), workers, [&](std::size_t i) {
    const auto& dim = rubric[i];
    std::ostringstream criteria;
    json props = {{"rationale", {{"type", "string"}}}};
    json required = json::array();
    for (const auto& sub : dim.subs) {
      criteria << "- " << sub.key << " (" << sub.name << "): " << sub.prompt << "\n";
      props[std::string(sub.key)] = {{"type", "number"}, {"minimum", 0}, {"maximum", 100}};
      required.push_back(sub.key);
    }
    JudgeRequest req;
    req.role_prompt = "You grade the writing quality of a research report on one dimension, " + std::string(dim.name) +
                      ". Score each criterion from 0 to 100 and explain briefly.";
    req.user_prompt = "### DIMENSION\n" + std::string(dim.key) + "\n### CRITERIA\n" + criteria.str() + report_block(report);
    req.output_schema = {{"title", "wq_" + std::string(dim.key)},
                         {"type", "object"},
                         {"required", required},
                         {"properties", props}};
    const auto reply = gateway.complete_structured(req).payload;
    WqDimensionScore out;
    out.dimension = dim.dimension;
    for (const auto& sub : dim.subs) out.sub_scores.push_back(reply.at(std::string(sub.key)).get<double>());
    out.score = wq_dimension_score(dim.dimension, out.sub_scores);
    out.rationale = reply.value("rationale", std::string());
    return out;
  });
  WqScores scores;
  for (std::size_t i = 0; i < dims.size(); ++i) scores.dimensions[i] = std::move(dims[i]);
  return scores;
}

KicRun evaluate_kic(Gateway& gateway, const Report& report, const Protocol& protocol, std::size_t workers) {
  if (protocol.kic_items.empty()) throw Error(Errc::EmptyChecklist, "protocol " + protocol.task_id + " has no checklist");
  struct Item {
    KicVerdict verdict;
    std::string justification;
    std::optional<std::string> diagnostic;
  };
  auto items = parallel_map(protocol.kic_items.size(), workers, [&](std::size_t i) -> Item {
    JudgeRequest req;
    req.role_prompt =
        "Answer the checklist question strictly from the report text. Answer yes only if the report states the "
        "fact or clearly entails it; otherwise answer no. Do not use outside knowledge.";
    req.user_prompt = "### QUESTION\n" + protocol.kic_items[i].question + "\n" + report_block(report);
    req.output_schema = {{"title", "kic_verdict"},
                         {"type", "object"},
                         {"required", {"verdict", "justification"}},
                         {"properties",
                          {{"verdict", {{"type", "string"}, {"enum", {"yes", "no"}}}},
                           {"justification", {{"type", "string"}}}}}};
    try {
      const auto reply = gateway.complete_structured(req).payload;
      return {reply.at("verdict") == "yes" ? KicVerdict::Yes : KicVerdict::No,
              reply.at("justification").get<std::string>(), std::nullopt};
    } catch (const Error& e) {
      return {KicVerdict::No, "", "item " + std::to_string(i) + ": " + e.what()};
    }
  });
  KicRun run;
  for (auto& it : items) {
    run.verdicts.verdicts.push_back(it.verdict);
    run.verdicts.justifications.push_back(std::move(it.justification));
    if (it.diagnostic) run.diagnostics.push_back(std::move(*it.diagnostic));
  }
  return run;
}

RqResult execute_rq(Gateway& gateway, EvidenceTools& evidence, const Report& report, const RqItem& item,
                    std::size_t item_index, const std::set<std::string>& tools, int step_budget) {
  ToolBox box(evidence, tools);
  std::ostringstream task;
  task << "### QUESTION\n" << item.question << "\n### PLAN\nextract: " << item.plan.extract_step
       << "\nverify: " << item.plan.verify_step << "\ncompare: " << item.plan.compare_step << "\n### TOOLS\n";
  for (const auto& t : tools) task << "- " << t << "\n";
  task << report_block(report);

  AgentSpec spec;
  spec.title = "rq_eval_step";
  spec.role_prompt = kRqRole;
  spec.task_prompt = task.str();
  spec.result_schema = rq_result_schema();
  spec.step_budget = step_budget;
  auto outcome = run_agent(gateway, box, spec);

  RqResult result;
  result.item_index = item_index;
  for (const auto& s : outcome.transcript) result.transcript.push_back(to_json(s).dump());
  json final_result;
  if (outcome.result) {
    final_result = *outcome.result;
  } else {
    JudgeRequest req;
    req.role_prompt = std::string(kRqRole) + " The step budget is spent: score now from the transcript so far.";
    req.user_prompt = spec.task_prompt + "### TRANSCRIPT\n" + render_transcript(outcome.transcript);
    req.output_schema = rq_result_schema();
    req.output_schema["title"] = "rq_final_score";
    final_result = gateway.complete_structured(req).payload;
    result.incomplete = true;
  }
  result.deductions = deductions_from(final_result);
  result.score = rq_raw_score(result.deductions);
  return result;
}

RqRun evaluate_rq(Gateway& gateway, EvidenceTools& evidence, const Report& report, const Protocol& protocol,
                  int step_budget, std::size_t workers) {
  RqRun run;
  run.results = parallel_map(protocol.rq_items.size(), workers, [&](std::size_t i) {
    return execute_rq(gateway, evidence, report, protocol.rq_items[i], i, protocol.tools_selected, step_budget);
  });
  run.score = rq_score(run.results);
  return run;
}

json to_json(const WqScores& s) {
  json dims = json::object();
  for (const auto& d : s.dimensions) {
    const auto& rub = wq_rubric(d.dimension);
    json subs = json::object();
    for (std::size_t i = 0; i < rub.subs.size(); ++i) subs[std::string(rub.subs[i].key)] = d.sub_scores.at(i);
    dims[std::string(rub.key)] = {{"score", d.score}, {"sub_scores", subs}, {"rationale", d.rationale}};
  }
  return {{"kind", "wq"}, {"dimensions", dims}, {"wq", wq_final(s)}};
}

json kic_audit(const Protocol& protocol, const KicRun& run) {
  json items = json::array();
  for (std::size_t i = 0; i < run.verdicts.verdicts.size(); ++i) {
    items.push_back({{"item", i},
                     {"question", protocol.kic_items.at(i).question},
                     {"verdict", run.verdicts.verdicts[i] == KicVerdict::Yes ? "yes" : "no"},
                     {"justification", run.verdicts.justifications[i]}});
  }
  return {{"kind", "kic"}, {"items", items}, {"diagnostics", run.diagnostics}};
}

json to_json(const RqResult& r) {
  json deds = json::array();
  for (const auto& d : r.deductions) deds.push_back({{"reason", d.reason}, {"points", d.points}});
  json transcript = json::array();
  for (const auto& t : r.transcript) transcript.push_back(json::parse(t));
  return {{"kind", "rq"},
          {"item", r.item_index},
          {"score", r.score},
          {"deductions", deds},
          {"incomplete", r.incomplete},
          {"transcript", transcript}};
}

}  // namespace dreval
