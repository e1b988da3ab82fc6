#include <gtest/gtest.h>

#include "dreval/agent.hpp"
#include "dreval/url.hpp"
#include "support.hpp"

namespace dreval {
namespace {

struct Web {
  std::shared_ptr<testing::ListSearch> search;
  std::shared_ptr<testing::MapPages> pages = std::make_shared<testing::MapPages>();
  std::shared_ptr<EvidenceTools> tools;
  Web() {
    search = std::make_shared<testing::ListSearch>(std::vector<SearchResult>{
        {"https://Example.org/a", "A", "first", parse_partial_date("2024-05")},
        {"https://example.net/b", "B", "second", std::nullopt}});
    pages->add_text("https://example.org/a", std::string(5000, 'x'));
    tools = testing::evidence_over(search, pages);
  }
};

TEST(ToolBox, SearchObservationListsResults) {
  Web web;
  ToolBox box(*web.tools, {"url_fetch", "web_search"});
  const auto step = box.run(1, "web_search", "topic");
  EXPECT_EQ(step.urls, (std::vector<std::string>{normalize_url("https://Example.org/a"), normalize_url("https://example.net/b")}));
  EXPECT_NE(step.observation.find("1. https://Example.org/a | A | 2024-05"), std::string::npos) << step.observation;
  EXPECT_NE(step.observation.find("undated"), std::string::npos);
}

TEST(ToolBox, UnselectedToolIsAnObservationNotAnError) {
  Web web;
  ToolBox box(*web.tools, {"url_fetch", "web_search"});
  const auto step = box.run(2, "github", "llama.cpp");
  EXPECT_NE(step.observation.find("not available"), std::string::npos);
  EXPECT_TRUE(step.urls.empty());
  EXPECT_EQ(web.search->calls(), 0u);
}

TEST(ToolBox, FetchTruncatesAndReportsFailures) {
  Web web;
  ToolBox box(*web.tools, {"url_fetch", "web_search"});
  const auto ok = box.run(1, "url_fetch", "https://example.org/a");
  EXPECT_LT(ok.observation.size(), 4100u);
  EXPECT_EQ(ok.urls.size(), 1u);
  const auto missing = box.run(2, "url_fetch", "https://example.org/missing");
  EXPECT_EQ(missing.observation.rfind("fetch failed", 0), 0u);
  const auto bad = box.run(3, "url_fetch", "not a url");
  EXPECT_EQ(bad.observation.rfind("tool error", 0), 0u);
}

TEST(Agent, FinishWithoutResultIsSentBack) {
  Web web;
  ToolBox box(*web.tools, {"url_fetch", "web_search"});
  int calls = 0;
  auto backend = std::make_shared<testing::FnBackend>([&](const JudgeRequest&) {
    return ++calls == 1 ? json{{"action", "finish"}}.dump()
                        : json{{"action", "finish"}, {"result", {{"ok", true}}}}.dump();
  });
  auto gw = testing::live_gateway(backend);
  AgentSpec spec;
  spec.title = "t";
  spec.task_prompt = "### TASK\nx";
  spec.result_schema = {{"type", "object"}};
  spec.step_budget = 3;
  const auto out = run_agent(*gw, box, spec);
  ASSERT_TRUE(out.result);
  EXPECT_EQ(out.steps, 2);
  ASSERT_EQ(out.transcript.size(), 1u);
  EXPECT_EQ(out.transcript[0].tool, "rejected");
}

TEST(Agent, BudgetRunsOut) {
  Web web;
  ToolBox box(*web.tools, {"url_fetch", "web_search"});
  auto gw = testing::live_gateway(testing::constant_backend({{"action", "web_search"}, {"input", "q"}}));
  AgentSpec spec;
  spec.title = "t";
  spec.result_schema = {{"type", "object"}};
  spec.step_budget = 4;
  const auto out = run_agent(*gw, box, spec);
  EXPECT_FALSE(out.result);
  EXPECT_EQ(out.steps, 4);
  EXPECT_EQ(out.transcript.size(), 4u);
}

TEST(Agent, StepSchemaOffersOnlyAllowedTools) {
  const auto s = agent_step_schema("t", {"url_fetch", "web_search"}, {{"type", "object"}});
  EXPECT_EQ(s.at("properties").at("action").at("enum"), (json{"url_fetch", "web_search", "finish"}));
  EXPECT_EQ(s.at("required"), json{"action"});
}

}  // namespace
}  // namespace dreval
