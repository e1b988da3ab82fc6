#include <gtest/gtest.h>

#include <algorithm>
#include <regex>

#include "dreval/app.hpp"
#include "dreval/error.hpp"
#include "dreval/io.hpp"
#include "dreval/protocol.hpp"
#include "dreval/url.hpp"
#include "scripted/fixture_set.hpp"
#include "scripted/scripted_judge.hpp"
#include "support.hpp"

namespace dreval {
namespace {

using testing::FnBackend;
using testing::ListSearch;
using testing::MapPages;

const std::string kSource = "https://www.example.gov/report";

// One search step, then whatever `finish` returns.
std::shared_ptr<FnBackend> agent_backend(std::function<json(int attempt)> finish) {
  auto finishes = std::make_shared<int>(0);
  return std::make_shared<FnBackend>([finish, finishes](const JudgeRequest& req) {
    if (req.output_schema.value("title", "") == "tool_selection") return json{{"tools", {"web_search"}}}.dump();
    if (req.user_prompt.find("[step 1]") == std::string::npos) {
      return json{{"action", "web_search"}, {"input", "topic"}}.dump();
    }
    return json{{"action", "finish"}, {"result", finish((*finishes)++)}}.dump();
  });
}

std::shared_ptr<EvidenceTools> small_web(std::optional<Date> cutoff = std::nullopt) {
  SearchResult r{kSource, "Report", "Official figures", parse_partial_date("2025-01-01")};
  EvidenceOptions opts;
  opts.default_cutoff = cutoff;
  return testing::evidence_over(std::make_shared<ListSearch>(std::vector<SearchResult>{r}),
                                std::make_shared<MapPages>(), opts);
}

json kic_item(const std::string& q, const std::string& url = kSource) {
  return {{"question", q}, {"grounding", {{{"url", url}, {"snippet", "s"}}}}};
}

json rq_item(const std::vector<std::string>& verify_tools, const std::string& verify = "Use web_search.") {
  return {{"question", "Why?"},
          {"plan",
           {{"extract_step", "Extract the causal chain."},
            {"verify_step", verify},
            {"compare_step", "Compare."},
            {"verify_tools", verify_tools}}},
          {"grounding", {{{"url", kSource}, {"snippet", "s"}}}}};
}

ProtocolOptions options(int min_kic = 2, int max_kic = 4) {
  ProtocolOptions o;
  o.today = testing::ymd(2025, 12, 23);
  o.min_kic = min_kic;
  o.max_kic = max_kic;
  o.min_rq = 1;
  o.max_rq = 2;
  o.step_budget = 6;
  return o;
}

const std::set<std::string> kBasic{"url_fetch", "web_search"};

TEST(SelectTools, AlwaysIncludesRequired) {
  auto gw = testing::live_gateway(testing::constant_backend({{"tools", {"github"}}}));
  EXPECT_EQ(select_tools(*gw, "q", testing::ymd(2025, 1, 1)),
            (std::set<std::string>{"github", "url_fetch", "web_search"}));
}

TEST(SelectTools, SchemaViolationFallsBack) {
  auto gw = testing::live_gateway(testing::constant_backend({{"tools", {"telnet"}}}));
  EXPECT_EQ(select_tools(*gw, "q", testing::ymd(2025, 1, 1)), kBasic);
}

TEST(SelectTools, ScriptedJudgeCues) {
  auto gw = testing::live_gateway(scripted::make_scripted_judge());
  const auto today = testing::ymd(2025, 12, 23);
  EXPECT_TRUE(select_tools(*gw, "compare two open-source repos' architectures", today).contains("github"));
  EXPECT_EQ(select_tools(*gw, "current inflation outlook", today), kBasic);
}

TEST(CreateKic, KeepsGroundedYesNoQuestionsAndTruncates) {
  auto backend = agent_backend([](int) {
    return json{{"items",
                 {kic_item("Does the report give the 2024 figure?"), kic_item("What is the figure?"),
                  kic_item("Is the deadline stated?", "https://elsewhere.org/unseen"),
                  kic_item("Does it name the agency?"), kic_item("Has the rate changed?"),
                  kic_item("Are the two sources compared?"), kic_item("Can readers find the date?")}}};
  });
  auto gw = testing::live_gateway(backend);
  auto web = small_web();
  const auto out = create_kic(*gw, *web, "topic", kBasic, options(2, 4));
  ASSERT_EQ(out.items.size(), 4u);
  EXPECT_EQ(out.items[0].question, "Does the report give the 2024 figure?");
  EXPECT_EQ(out.items[1].question, "Does it name the agency?");
  for (const auto& it : out.items) EXPECT_EQ(it.grounding.front().url, kSource);
}

TEST(CreateKic, ShortChecklistIsSentBack) {
  auto backend = agent_backend([](int attempt) {
    json items = {kic_item("Does the report give the figure?")};
    if (attempt > 0) items.push_back(kic_item("Does it name the agency?"));
    return json{{"items", items}};
  });
  auto gw = testing::live_gateway(backend);
  auto web = small_web();
  const auto out = create_kic(*gw, *web, "topic", kBasic, options(2, 4));
  EXPECT_EQ(out.items.size(), 2u);
  const auto rejected = std::count_if(out.transcript.begin(), out.transcript.end(),
                                      [](const TranscriptStep& s) { return s.tool == "rejected"; });
  EXPECT_EQ(rejected, 1);
}

TEST(CreateKic, TwoStepBudgetIsExhausted) {
  auto gw = testing::live_gateway(scripted::make_scripted_judge());
  testing::TempDir scratch;
  auto set = fixtures::load_fixture_set(DREVAL_FIXTURE_DIR, scratch.path());
  auto rt = fixtures::make_runtime(set, scripted::make_scripted_judge());
  auto opts = protocol_options(set.config);
  opts.step_budget = 2;
  opts.min_kic = 8;
  try {
    create_kic(*gw, *rt.evidence, set.task("tiktok").query, kBasic, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BudgetExhausted);
  }
}

TEST(CreateKic, RefusesCutoffEvidence) {
  auto gw = testing::live_gateway(agent_backend([](int) { return json{{"items", json::array()}}; }));
  auto web = small_web(testing::ymd(2024, 1, 1));
  try {
    create_kic(*gw, *web, "topic", kBasic, options());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PreconditionViolation);
  }
}

TEST(CreateRq, PlanNamingUnselectedToolGetsOneRepair) {
  auto backend = agent_backend([](int attempt) {
    return json{{"items", {attempt == 0 ? rq_item({"web_search", "arxiv"}) : rq_item({"web_search"})}}};
  });
  auto gw = testing::live_gateway(backend);
  auto web = small_web();
  const auto out = create_rq(*gw, *web, "topic", kBasic, options());
  ASSERT_EQ(out.items.size(), 1u);
  EXPECT_EQ(out.items[0].plan.verify_tools, (std::vector<std::string>{"web_search"}));
}

TEST(CreateRq, SecondMismatchIsPlanToolMismatch) {
  auto backend = agent_backend([](int) { return json{{"items", {rq_item({"web_search", "github"})}}}; });
  auto gw = testing::live_gateway(backend);
  auto web = small_web();
  try {
    create_rq(*gw, *web, "topic", kBasic, options());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PlanToolMismatch);
  }
}

TEST(CreateRq, MismatchInVerifyStepText) {
  auto backend = agent_backend(
      [](int) { return json{{"items", {rq_item({"web_search"}, "Search arxiv for preprints on the topic.")}}}; });
  auto gw = testing::live_gateway(backend);
  auto web = small_web();
  EXPECT_THROW(create_rq(*gw, *web, "topic", kBasic, options()), Error);
}

Protocol sample_protocol() {
  Protocol p;
  p.task_id = "t1";
  p.query = "What changed?";
  p.created_at = "2025-12-23T00:00:00Z";
  p.tools_selected = kBasic;
  p.kic_items = {{"Does it say X?", {{kSource, "snippet \"quoted\"\nline"}}, 1.0}};
  p.rq_items = {{"Why?", {"e", "Use web_search.", "c", {"web_search"}}, {{kSource, "s"}}}};
  p.run_id = "abc";
  return p;
}

TEST(ProtocolFile, RoundTrip) {
  testing::TempDir dir;
  const auto p = sample_protocol();
  save_protocol(p, dir / "p.json");
  EXPECT_EQ(load_protocol(dir / "p.json"), p);
  EXPECT_FALSE(protocol_violation(p));
  const auto j = json::parse(read_file(dir / "p.json"));
  for (const char* field : {"version", "task_id", "query", "created_at", "tools_selected", "kic_items", "rq_items"}) {
    EXPECT_TRUE(j.contains(field)) << field;
  }
}

TEST(ProtocolFile, VersionAndCorruption) {
  testing::TempDir dir;
  auto j = to_json(sample_protocol());
  j["version"] = 99;
  write_file_atomic(dir / "v.json", j.dump());
  try {
    load_protocol(dir / "v.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SchemaVersionMismatch);
  }
  save_protocol(sample_protocol(), dir / "p.json");
  const auto full = read_file(dir / "p.json");
  write_file_atomic(dir / "half.json", full.substr(0, full.size() / 2));
  try {
    load_protocol(dir / "half.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CorruptFile);
  }
}

TEST(ProtocolFile, ViolationsAreReported) {
  auto p = sample_protocol();
  p.rq_items[0].plan.verify_tools = {"github"};
  EXPECT_TRUE(protocol_violation(p));
  p = sample_protocol();
  p.kic_items.clear();
  EXPECT_TRUE(protocol_violation(p));
  p = sample_protocol();
  p.kic_items[0].grounding.clear();
  EXPECT_TRUE(protocol_violation(p));
}

// Replay of the bundled fixture set.
class FixtureProtocol : public ::testing::Test {
 protected:
  void SetUp() override {
    set_ = fixtures::load_fixture_set(DREVAL_FIXTURE_DIR, scratch_.path());
    rt_ = fixtures::make_runtime(set_);
  }
  testing::TempDir scratch_;
  fixtures::FixtureSet set_;
  fixtures::FixtureRuntime rt_;
};

TEST_F(FixtureProtocol, TikTokChecklistHasCurrentDeadline) {
  const auto& t = set_.task("tiktok");
  const auto opts = protocol_options(set_.config);
  const auto a = create_kic(*rt_.gateway, *rt_.evidence, t.query, kBasic, opts);
  const auto b = create_kic(*rt_.gateway, *rt_.evidence, t.query, kBasic, opts);
  EXPECT_EQ(a.items, b.items);
  EXPECT_TRUE(std::any_of(a.items.begin(), a.items.end(), [](const KicItem& k) {
    return k.question.find("current divestiture deadline is January 23, 2026") != std::string::npos;
  }));
  EXPECT_EQ(a.items, set_.protocol("tiktok").kic_items);
}

TEST_F(FixtureProtocol, GroundingAppearsInTranscript) {
  for (const auto& t : set_.tasks) {
    const auto p = set_.protocol(t.task_id);
    const auto opts = protocol_options(set_.config);
    const auto kic = create_kic(*rt_.gateway, *rt_.evidence, t.query, p.tools_selected, opts);
    const auto rq = create_rq(*rt_.gateway, *rt_.evidence, t.query, p.tools_selected, opts);
    auto seen = [](const std::vector<TranscriptStep>& steps) {
      std::set<std::string> urls;
      for (const auto& s : steps) urls.insert(s.urls.begin(), s.urls.end());
      return urls;
    };
    const auto kic_urls = seen(kic.transcript);
    for (const auto& item : kic.items) EXPECT_TRUE(kic_urls.contains(normalize_url(item.grounding.front().url)));
    const auto rq_urls = seen(rq.transcript);
    for (const auto& item : rq.items) EXPECT_TRUE(rq_urls.contains(normalize_url(item.grounding.front().url)));
    EXPECT_EQ(rq.items, p.rq_items);
  }
}

TEST_F(FixtureProtocol, RecordedProtocolsAreWellFormed) {
  const std::regex tool_word(R"(\b(web_search|url_fetch|arxiv|github)\b)");
  for (const auto& t : set_.tasks) {
    const auto p = set_.protocol(t.task_id);
    EXPECT_FALSE(protocol_violation(p)) << t.task_id;
    EXPECT_GE(p.kic_items.size(), 8u);
    EXPECT_LE(p.kic_items.size(), 16u);
    EXPECT_GE(p.rq_items.size(), 3u);
    for (const auto& item : p.rq_items) {
      bool names_selected = false;
      for (auto it = std::sregex_iterator(item.plan.verify_step.begin(), item.plan.verify_step.end(), tool_word);
           it != std::sregex_iterator(); ++it) {
        EXPECT_TRUE(p.tools_selected.contains(it->str()));
        names_selected = true;
      }
      EXPECT_TRUE(names_selected);
    }
  }
  EXPECT_TRUE(set_.protocol("repos").tools_selected.contains("github"));
  EXPECT_EQ(set_.protocol("heatwave").tools_selected, kBasic);
}

}  // namespace
}  // namespace dreval
