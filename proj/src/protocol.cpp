#include "dreval/protocol.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <sstream>

#include "dreval/error.hpp"
#include "dreval/io.hpp"
#include "dreval/text.hpp"
#include "dreval/url.hpp"

namespace dreval {
namespace {

const std::map<std::string, std::string, std::less<>> kToolBlurbs{
    {"web_search", "general web search returning ranked results with snippets and dates"},
    {"url_fetch", "retrieve the main text of a web page"},
    {"arxiv", "search restricted to arXiv preprints"},
    {"github", "search restricted to GitHub repositories and code"},
};

std::string tool_list(const std::set<std::string>& tools) {
  std::ostringstream out;
  for (const auto& t : tools) {
    auto it = kToolBlurbs.find(t);
    out << "- " << t << ": " << (it == kToolBlurbs.end() ? "" : it->second) << "\n";
  }
  return out.str();
}

std::string header(std::string_view query, Date today, const std::set<std::string>& tools) {
  return "### QUERY\n" + std::string(query) + "\n### TODAY\n" + format_iso_date(today) + "\n### TOOLS\n" +
         tool_list(tools);
}

json string_schema() { return {{"type", "string"}, {"minLength", 1}}; }

json grounding_schema() {
  return {{"type", "array"},
          {"minItems", 1},
          {"items",
           {{"type", "object"},
            {"required", {"url", "snippet"}},
            {"properties", {{"url", string_schema()}, {"snippet", {{"type", "string"}}}}}}}};
}

bool is_yes_no_question(std::string_view q) {
  static constexpr std::array<std::string_view, 16> kOpeners{"is ",  "are ", "was ", "were ",  "does ",  "do ",
                                                             "did ", "has ", "have ", "had ", "can ", "will ",
                                                             "should ", "could ", "would ", "must "};
  const auto t = text::trim(q);
  if (t.empty() || t.back() != '?') return false;
  return std::any_of(kOpeners.begin(), kOpeners.end(), [&](auto o) { return text::starts_with_icase(t, o); });
}

std::set<std::string> transcript_urls(const std::vector<TranscriptStep>& steps) {
  std::set<std::string> urls;
  for (const auto& s : steps) urls.insert(s.urls.begin(), s.urls.end());
  return urls;
}

// Keeps only grounding entries whose URL surfaced in the transcript.
std::vector<Grounding> grounded(const json& arr, const std::set<std::string>& seen) {
  std::vector<Grounding> out;
  for (const auto& g : arr) {
    Grounding item{g.at("url").get<std::string>(), g.at("snippet").get<std::string>()};
    try {
      if (seen.contains(normalize_url(item.url))) out.push_back(std::move(item));
    } catch (const Error&) {
    }
  }
  return out;
}

std::vector<KicItem> kic_from_result(const json& result, const std::vector<TranscriptStep>& steps) {
  const auto seen = transcript_urls(steps);
  std::vector<KicItem> items;
  for (const auto& it : result.at("items")) {
    KicItem k{std::string(text::trim(it.at("question").get<std::string>())), grounded(it.at("grounding"), seen), 1.0};
    if (is_yes_no_question(k.question) && !k.grounding.empty()) items.push_back(std::move(k));
  }
  return items;
}

std::vector<std::string> tools_named_in(std::string_view text_, const ToolRoster& roster) {
  std::vector<std::string> named;
  const auto lower = text::to_lower(text_);
  for (const auto& t : roster.available) {
    std::size_t pos = 0;
    while ((pos = lower.find(t, pos)) != std::string::npos) {
      const bool left = pos == 0 || !(std::isalnum(static_cast<unsigned char>(lower[pos - 1])) || lower[pos - 1] == '_');
      const auto end = pos + t.size();
      const bool right =
          end >= lower.size() || !(std::isalnum(static_cast<unsigned char>(lower[end])) || lower[end] == '_');
      if (left && right) {
        named.push_back(t);
        break;
      }
      pos = end;
    }
  }
  return named;
}

ValidationPlan plan_from_json(const json& j) {
  return {j.at("extract_step").get<std::string>(), j.at("verify_step").get<std::string>(),
          j.at("compare_step").get<std::string>(), j.at("verify_tools").get<std::vector<std::string>>()};
}

std::optional<std::string> plan_mismatch(const ValidationPlan& plan, const std::set<std::string>& tools) {
  auto named = tools_named_in(plan.verify_step, ToolRoster{});
  named.insert(named.end(), plan.verify_tools.begin(), plan.verify_tools.end());
  for (const auto& t : named) {
    if (!tools.contains(t)) return "validation plan uses tool \"" + t + "\" which was not selected";
  }
  return std::nullopt;
}

std::vector<RqItem> rq_from_result(const json& result, const std::vector<TranscriptStep>& steps) {
  const auto seen = transcript_urls(steps);
  std::vector<RqItem> items;
  for (const auto& it : result.at("items")) {
    RqItem r{std::string(text::trim(it.at("question").get<std::string>())), plan_from_json(it.at("plan")),
             grounded(it.at("grounding"), seen)};
    if (!r.grounding.empty()) items.push_back(std::move(r));
  }
  return items;
}

void require_no_cutoff(const EvidenceTools& evidence) {
  if (evidence.options().default_cutoff) {
    throw Error(Errc::PreconditionViolation, "protocol creation must see up-to-date evidence; cutoff is set");
  }
}

const char* kKicRole =
    "You build a checklist of key information a high-quality answer to a research query must contain. "
    "Research the query with the tools first. Then finish with yes/no questions, each checking one concrete, "
    "verifiable fact (names, figures, dates, current status). Use today's date to decide what is current. "
    "Ground every question in a URL you actually saw in the transcript, quoting the supporting snippet. "
    "Reply with one JSON object per step: either a tool action with its input, or action \"finish\" with the result.";

const char* kRqRole =
    "You write analytical questions that test the reasoning quality of a research report on the query. "
    "Research the query with the tools first. Each question targets a causal or comparative argument the report "
    "should make, and carries a validation plan in three stages: how to extract the report's reasoning chain, "
    "which external checks to run with which of the listed tools, and what criteria decide the comparison. "
    "Only name tools from the TOOLS list. Ground every question in a URL from the transcript. "
    "Reply with one JSON object per step: either a tool action with its input, or action \"finish\" with the result.";

}  // namespace

std::set<std::string> select_tools(Gateway& gateway, std::string_view query, Date today, const ToolRoster& roster) {
  std::set<std::string> chosen = roster.required;
  json options = json::array();
  for (const auto& t : roster.available) options.push_back(t);
  JudgeRequest req;
  req.role_prompt =
      "Choose the retrieval tools needed to research the query. Include specialised tools only when the query "
      "clearly needs them (academic papers: arxiv; software repositories or code: github). Fewer tools means less "
      "noise.";
  req.user_prompt = header(query, today, roster.available);
  req.output_schema = {
      {"title", "tool_selection"},
      {"type", "object"},
      {"required", {"tools"}},
      {"properties",
       {{"tools", {{"type", "array"}, {"items", {{"type", "string"}, {"enum", options}}}}},
        {"rationale", {{"type", "string"}}}}},
  };
  try {
    const auto reply = gateway.complete_structured(req);
    for (const auto& t : reply.payload.at("tools")) chosen.insert(t.get<std::string>());
  } catch (const Error& e) {
    if (e.code() != Errc::SchemaViolation) throw;
    spdlog::warn("tool selection reply unusable ({}); using default tools", e.what());
  }
  return chosen;
}

KicCreation create_kic(Gateway& gateway, EvidenceTools& evidence, std::string_view query,
                       const std::set<std::string>& tools, const ProtocolOptions& options) {
  require_no_cutoff(evidence);
  ToolBox box(evidence, tools, options.search_results);
  AgentSpec spec;
  spec.title = "kic_agent_step";
  spec.role_prompt = kKicRole;
  spec.task_prompt = header(query, options.today, tools) + "### LIMITS\nbetween " + std::to_string(options.min_kic) +
                     " and " + std::to_string(options.max_kic) + " items\n";
  spec.result_schema = {
      {"type", "object"},
      {"required", {"items"}},
      {"properties",
       {{"items",
         {{"type", "array"},
          {"minItems", 1},
          {"items",
           {{"type", "object"},
            {"required", {"question", "grounding"}},
            {"properties", {{"question", string_schema()}, {"grounding", grounding_schema()}}}}}}}}},
  };
  spec.step_budget = options.step_budget;
  spec.accept = [&](const json& result, const std::vector<TranscriptStep>& steps) -> std::optional<std::string> {
    const auto n = kic_from_result(result, steps).size();
    if (n >= static_cast<std::size_t>(options.min_kic)) return std::nullopt;
    return "only " + std::to_string(n) + " items are yes/no questions grounded in transcript URLs; at least " +
           std::to_string(options.min_kic) + " are required";
  };
  auto outcome = run_agent(gateway, box, spec);
  if (!outcome.result) {
    throw Error(Errc::BudgetExhausted, "checklist creation used " + std::to_string(options.step_budget) +
                                           " steps without " + std::to_string(options.min_kic) + " grounded items");
  }
  KicCreation out{kic_from_result(*outcome.result, outcome.transcript), std::move(outcome.transcript), outcome.steps};
  if (out.items.size() > static_cast<std::size_t>(options.max_kic)) out.items.resize(options.max_kic);
  return out;
}

RqCreation create_rq(Gateway& gateway, EvidenceTools& evidence, std::string_view query,
                     const std::set<std::string>& tools, const ProtocolOptions& options) {
  require_no_cutoff(evidence);
  ToolBox box(evidence, tools, options.search_results);
  AgentSpec spec;
  spec.title = "rq_agent_step";
  spec.role_prompt = kRqRole;
  spec.task_prompt = header(query, options.today, tools) + "### LIMITS\nbetween " + std::to_string(options.min_rq) +
                     " and " + std::to_string(options.max_rq) + " items\n";
  spec.result_schema = {
      {"type", "object"},
      {"required", {"items"}},
      {"properties",
       {{"items",
         {{"type", "array"},
          {"minItems", 1},
          {"items",
           {{"type", "object"},
            {"required", {"question", "plan", "grounding"}},
            {"properties",
             {{"question", string_schema()},
              {"plan",
               {{"type", "object"},
                {"required", {"extract_step", "verify_step", "compare_step", "verify_tools"}},
                {"properties",
                 {{"extract_step", string_schema()},
                  {"verify_step", string_schema()},
                  {"compare_step", string_schema()},
                  {"verify_tools", {{"type", "array"}, {"minItems", 1}, {"items", string_schema()}}}}}}},
              {"grounding", grounding_schema()}}}}}}}}},
  };
  spec.step_budget = options.step_budget;
  int mismatches = 0;
  spec.accept = [&](const json& result, const std::vector<TranscriptStep>& steps) -> std::optional<std::string> {
    for (const auto& it : result.at("items")) {
      if (auto bad = plan_mismatch(plan_from_json(it.at("plan")), tools)) {
        if (++mismatches > 1) throw Error(Errc::PlanToolMismatch, *bad);
        return *bad + "; revise the plans to use only the listed tools";
      }
    }
    const auto n = rq_from_result(result, steps).size();
    if (n >= static_cast<std::size_t>(options.min_rq)) return std::nullopt;
    return "only " + std::to_string(n) + " items are grounded in transcript URLs; at least " +
           std::to_string(options.min_rq) + " are required";
  };
  auto outcome = run_agent(gateway, box, spec);
  if (!outcome.result) {
    throw Error(Errc::BudgetExhausted, "question creation used " + std::to_string(options.step_budget) +
                                           " steps without " + std::to_string(options.min_rq) + " grounded items");
  }
  RqCreation out{rq_from_result(*outcome.result, outcome.transcript), std::move(outcome.transcript), outcome.steps};
  if (out.items.size() > static_cast<std::size_t>(options.max_rq)) out.items.resize(options.max_rq);
  return out;
}

Protocol create_protocol(Gateway& gateway, EvidenceTools& evidence, std::string task_id, std::string query,
                         const ProtocolOptions& options) {
  Protocol p;
  p.task_id = std::move(task_id);
  p.query = std::move(query);
  p.created_at = format_iso_date(options.today);
  p.tools_selected = select_tools(gateway, p.query, options.today);
  p.kic_items = create_kic(gateway, evidence, p.query, p.tools_selected, options).items;
  p.rq_items = create_rq(gateway, evidence, p.query, p.tools_selected, options).items;
  return p;
}

std::optional<std::string> protocol_violation(const Protocol& p) {
  if (!p.tools_selected.contains(std::string(tool::kWebSearch))) return "web_search not selected";
  if (p.kic_items.empty()) return "no checklist items";
  if (p.rq_items.empty()) return "no reasoning questions";
  for (std::size_t i = 0; i < p.kic_items.size(); ++i) {
    if (p.kic_items[i].grounding.empty()) return "checklist item " + std::to_string(i) + " has no grounding";
  }
  for (std::size_t i = 0; i < p.rq_items.size(); ++i) {
    const auto& r = p.rq_items[i];
    if (r.grounding.empty()) return "question " + std::to_string(i) + " has no grounding";
    if (r.plan.extract_step.empty() || r.plan.verify_step.empty() || r.plan.compare_step.empty()) {
      return "question " + std::to_string(i) + " has an incomplete plan";
    }
    if (auto bad = plan_mismatch(r.plan, p.tools_selected)) return "question " + std::to_string(i) + ": " + *bad;
  }
  return std::nullopt;
}

json to_json(const Protocol& p) {
  auto grounding = [](const std::vector<Grounding>& gs) {
    json arr = json::array();
    for (const auto& g : gs) arr.push_back({{"url", g.url}, {"snippet", g.snippet}});
    return arr;
  };
  json kic = json::array();
  for (const auto& k : p.kic_items) {
    kic.push_back({{"question", k.question}, {"grounding", grounding(k.grounding)}, {"weight", k.weight}});
  }
  json rq = json::array();
  for (const auto& r : p.rq_items) {
    rq.push_back({{"question", r.question},
                  {"plan",
                   {{"extract_step", r.plan.extract_step},
                    {"verify_step", r.plan.verify_step},
                    {"compare_step", r.plan.compare_step},
                    {"verify_tools", r.plan.verify_tools}}},
                  {"grounding", grounding(r.grounding)}});
  }
  return {{"version", kProtocolVersion},
          {"task_id", p.task_id},
          {"query", p.query},
          {"created_at", p.created_at},
          {"tools_selected", p.tools_selected},
          {"kic_items", kic},
          {"rq_items", rq},
          {"run_id", p.run_id}};
}

Protocol protocol_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version")) throw Error(Errc::CorruptFile, "protocol document has no version");
  if (j["version"] != kProtocolVersion) {
    throw Error(Errc::SchemaVersionMismatch, "protocol version " + j["version"].dump() + " is not supported (expected " +
                                                 std::to_string(kProtocolVersion) + ")");
  }
  try {
    auto grounding = [](const json& arr) {
      std::vector<Grounding> out;
      for (const auto& g : arr) out.push_back({g.at("url").get<std::string>(), g.at("snippet").get<std::string>()});
      return out;
    };
    Protocol p;
    p.task_id = j.at("task_id").get<std::string>();
    p.query = j.at("query").get<std::string>();
    p.created_at = j.at("created_at").get<std::string>();
    p.tools_selected = j.at("tools_selected").get<std::set<std::string>>();
    for (const auto& k : j.at("kic_items")) {
      p.kic_items.push_back({k.at("question").get<std::string>(), grounding(k.at("grounding")), k.value("weight", 1.0)});
    }
    for (const auto& r : j.at("rq_items")) {
      p.rq_items.push_back({r.at("question").get<std::string>(), plan_from_json(r.at("plan")), grounding(r.at("grounding"))});
    }
    p.run_id = j.value("run_id", std::string());
    return p;
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, std::string("protocol document: ") + e.what());
  }
}

void save_protocol(const Protocol& p, const std::filesystem::path& file) {
  write_file_atomic(file, to_json(p).dump(2) + "\n");
}

Protocol load_protocol(const std::filesystem::path& file) {
  const auto body = read_file(file);
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::CorruptFile, file.string() + ": " + e.what());
  }
  return protocol_from_json(j);
}

}  // namespace dreval
