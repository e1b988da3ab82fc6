#include <gtest/gtest.h>

#include <sstream>

#include "dreval/app.hpp"
#include "dreval/error.hpp"
#include "dreval/io.hpp"
#include "dreval/results.hpp"
#include "scripted/fixture_set.hpp"
#include "support.hpp"

namespace dreval {
namespace {

namespace fs = std::filesystem;

class App : public ::testing::Test {
 protected:
  void SetUp() override {
    set_ = fixtures::load_fixture_set(DREVAL_FIXTURE_DIR, scratch_.path());
    ctx_.config = set_.config;
    ctx_.config.protocol_dir = scratch_ / "protocols";
  }

  // Manifest in the scratch dir; reports resolve to the fixture copies.
  fs::path manifest(const std::vector<std::string>& ids, const std::string& extra_query = "") {
    json tasks = json::array();
    for (const auto& id : ids) {
      const auto& t = set_.task(id);
      tasks.push_back({{"task_id", id}, {"query", t.query}, {"report", fs::absolute(*t.report).string()}});
    }
    if (!extra_query.empty()) {
      tasks.push_back({{"task_id", "novel"}, {"query", extra_query}, {"report", fs::absolute(*set_.task("tiktok").report).string()}});
    }
    const auto file = scratch_ / ("tasks-" + std::to_string(counter_++) + ".json");
    write_file_atomic(file, json{{"version", 1}, {"tasks", tasks}}.dump());
    return file;
  }

  void use_recorded_protocols() { ctx_.config.protocol_dir = fs::path(DREVAL_FIXTURE_DIR) / "protocols"; }

  testing::TempDir scratch_;
  fixtures::FixtureSet set_;
  AppContext ctx_;
  int counter_ = 0;
};

TEST_F(App, SingleQueryFileWritesOneProtocol) {
  const auto file = scratch_ / "tiktok.txt";
  write_file_atomic(file, set_.task("tiktok").query + "\n");
  const auto r = cmd_protocol_create(ctx_, file);
  EXPECT_EQ(r.exit_code, kExitOk) << (r.errors.empty() ? "" : r.errors[0]);
  ASSERT_TRUE(fs::exists(protocol_path(ctx_.config, "tiktok")));
  const auto p = load_protocol(protocol_path(ctx_.config, "tiktok"));
  EXPECT_EQ(p.kic_items, set_.protocol("tiktok").kic_items);
  EXPECT_EQ(p.run_id, r.run_id);
  EXPECT_EQ(r.run_id.size(), 16u);
  EXPECT_TRUE(fs::exists(ctx_.config.results_dir / "manifests" / (r.run_id + ".json")));
}

TEST_F(App, ReplayWithoutFixturesIsFatal) {
  ctx_.config.fixture_dir = scratch_ / "empty-recordings";
  fs::create_directories(ctx_.config.fixture_dir);
  const auto r = cmd_protocol_create(ctx_, manifest({"heatwave"}));
  EXPECT_EQ(r.exit_code, kExitFatal);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_FALSE(fs::exists(protocol_path(ctx_.config, "heatwave")));
}

TEST_F(App, OneMissingFixtureIsPartial) {
  const auto r = cmd_protocol_create(ctx_, manifest({"tiktok", "heatwave"}, "An unrecorded query about tides?"));
  EXPECT_EQ(r.exit_code, kExitPartial);
  EXPECT_TRUE(fs::exists(protocol_path(ctx_.config, "tiktok")));
  EXPECT_TRUE(fs::exists(protocol_path(ctx_.config, "heatwave")));
  EXPECT_FALSE(fs::exists(protocol_path(ctx_.config, "novel")));
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].rfind("novel:", 0), 0u);
}

TEST_F(App, CutoffIsRefusedForProtocolCreation) {
  ctx_.config.cutoff_date = testing::ymd(2024, 1, 1);
  EXPECT_EQ(cmd_protocol_create(ctx_, manifest({"tiktok"})).exit_code, kExitFatal);
}

TEST_F(App, StaticMetricsNeedNoProtocol) {
  const auto r = cmd_evaluate(ctx_, manifest({"heatwave"}), {"wq", "factuality", "ci", "da"});
  ASSERT_EQ(r.exit_code, kExitOk) << (r.errors.empty() ? "" : r.errors[0]);
  const auto card = load_scorecard(scorecard_path(ctx_.config, "heatwave"));
  EXPECT_TRUE(card.wq);
  EXPECT_TRUE(card.factuality);
  EXPECT_FALSE(card.kic);
  EXPECT_FALSE(card.rq);
  // Metrics that were not requested are absent, not undefined.
  for (const auto& m : card.diagnostics.undefined_metrics) EXPECT_TRUE(m != "kic" && m != "rq") << m;
}

TEST_F(App, AdaptiveMetricsWithoutProtocolAreFatal) {
  const auto r = cmd_evaluate(ctx_, manifest({"heatwave"}), {"kic"});
  EXPECT_EQ(r.exit_code, kExitFatal);
  ASSERT_FALSE(r.errors.empty());
  EXPECT_NE(r.errors[0].find("protocol-create"), std::string::npos);
}

TEST_F(App, UnknownMetricIsRejected) {
  EXPECT_EQ(cmd_evaluate(ctx_, manifest({"heatwave"}), {"wq", "vibes"}).exit_code, kExitFatal);
  EXPECT_THROW(parse_metric_filter("wq,vibes"), Error);
  EXPECT_EQ(parse_metric_filter(" WQ , kic"), (std::set<std::string>{"kic", "wq"}));
}

TEST_F(App, RepeatedEvaluationIsByteIdentical) {
  use_recorded_protocols();
  const auto tasks = manifest({"tiktok", "heatwave", "repos"});
  const auto first = cmd_evaluate(ctx_, tasks, kAllMetrics);
  ASSERT_EQ(first.exit_code, kExitOk) << (first.errors.empty() ? "" : first.errors[0]);
  std::map<std::string, std::string> bytes;
  for (const auto& id : {"tiktok", "heatwave", "repos"}) bytes[id] = read_file(scorecard_path(ctx_.config, id));
  ctx_.config.results_dir = scratch_ / "second";
  const auto second = cmd_evaluate(ctx_, tasks, kAllMetrics);
  EXPECT_EQ(second.run_id, first.run_id);
  for (const auto& [id, b] : bytes) EXPECT_EQ(read_file(scorecard_path(ctx_.config, id)), b) << id;
  EXPECT_EQ(read_file(audit_path(ctx_.config, "tiktok")),
            read_file(scratch_ / "results" / "tiktok.audit.jsonl"));
}

TEST_F(App, ScoreAggregatesScorecards) {
  const auto dir = scratch_ / "cards";
  auto card = [](const std::string& id, double kic) {
    Scorecard s;
    s.task_id = id;
    s.run_id = "r";
    s.kic = kic;
    return s;
  };
  write_file_atomic(dir / "a.scorecard.json", to_json(card("a", 0.4)).dump());
  std::ostringstream out;
  ctx_.out = &out;
  auto r = cmd_score(ctx_, dir);
  ASSERT_EQ(r.exit_code, kExitOk);
  auto agg = json::parse(read_file(ctx_.config.results_dir / "aggregate.json"));
  EXPECT_DOUBLE_EQ(agg.at("scores").at("kic").get<double>(), 0.4);

  write_file_atomic(dir / "b.scorecard.json", to_json(card("b", 0.6)).dump());
  r = cmd_score(ctx_, dir);
  ASSERT_EQ(r.exit_code, kExitOk);
  agg = json::parse(read_file(ctx_.config.results_dir / "aggregate.json"));
  EXPECT_DOUBLE_EQ(agg.at("scores").at("kic").get<double>(), 0.5);
  EXPECT_NE(out.str().find("50.00"), std::string::npos);

  fs::create_directories(scratch_ / "none");
  EXPECT_EQ(cmd_score(ctx_, scratch_ / "none").exit_code, kExitFatal);
}

TEST_F(App, DefaultSweep) {
  SweepArgs args;
  args.pair_file = fs::path(DREVAL_DATA_DIR) / "table9_pairs.json";
  const auto r = cmd_sweep(ctx_, args);
  ASSERT_EQ(r.exit_code, kExitOk);
  const auto j = json::parse(read_file(ctx_.config.results_dir / "sweep.json"));
  ASSERT_EQ(j.at("grid").size(), 16u);
  EXPECT_EQ(j.at("factuality").front(), 1.0);
  EXPECT_EQ(j.at("factuality").back(), 0.0);
  for (const auto& a : j.at("alignment")) EXPECT_EQ(a, 1.0);
  EXPECT_EQ(j.at("config").at("run_id"), r.run_id);
  const auto csv = read_file(ctx_.config.results_dir / "sweep.csv");
  EXPECT_EQ(csv.rfind("r,k,factuality,alignment,run_id\n", 0), 0u);
}

TEST_F(App, MalformedPairFileNamesTheLine) {
  const auto file = scratch_ / "pairs.json";
  write_file_atomic(file,
                    "[\n  {\"id\": 1, \"topic\": \"a\",\n   \"true\": {\"claim\": \"x\", \"url\": \"u\"}\n  }\n]\n");
  SweepArgs args;
  args.pair_file = file;
  const auto r = cmd_sweep(ctx_, args);
  EXPECT_EQ(r.exit_code, kExitFatal);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_NE(r.errors[0].find("pairs.json:2"), std::string::npos) << r.errors[0];
}

TEST_F(App, InspectProtocolAndReport) {
  std::ostringstream out;
  EXPECT_EQ(cmd_inspect(protocol_path(set_.config, "tiktok"), out).exit_code, kExitOk);
  EXPECT_NE(out.str().find("January 23, 2026"), std::string::npos);
  std::ostringstream rep;
  EXPECT_EQ(cmd_inspect(*set_.task("tiktok").report, rep).exit_code, kExitOk);
  EXPECT_NE(rep.str().find("citations: "), std::string::npos);
  const auto bad = scratch_ / "bad.json";
  write_file_atomic(bad, "{");
  std::ostringstream sink;
  EXPECT_EQ(cmd_inspect(bad, sink).exit_code, kExitFatal);
}

TEST(Tasks, ManifestValidation) {
  testing::TempDir dir;
  auto write = [&](const std::string& body) {
    write_file_atomic(dir / "t.json", body);
    return dir / "t.json";
  };
  EXPECT_THROW(load_tasks(write(R"({"version": 2, "tasks": []})")), Error);
  EXPECT_THROW(load_tasks(write(R"({"version": 1, "tasks": [{"task_id": "a/b", "query": "q"}]})")), Error);
  EXPECT_THROW(load_tasks(write(R"({"version": 1, "tasks": [{"task_id": "a", "query": "q"}, {"task_id": "a", "query": "r"}]})")),
               Error);
  const auto tasks = load_tasks(write(R"({"version": 1, "tasks": [{"task_id": "a", "query": "q", "report": "r.md"}]})"));
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(*tasks[0].report, dir / "r.md");
  write_file_atomic(dir / "blank.txt", "  \n");
  EXPECT_THROW(load_tasks(dir / "blank.txt"), Error);
}

TEST(RunId, StableAndSensitive) {
  const auto a = make_run_id("evaluate", {{"x", 1}}, {{"f", "h"}});
  EXPECT_EQ(a, make_run_id("evaluate", {{"x", 1}}, {{"f", "h"}}));
  EXPECT_NE(a, make_run_id("evaluate", {{"x", 2}}, {{"f", "h"}}));
  EXPECT_NE(a, make_run_id("score", {{"x", 1}}, {{"f", "h"}}));
  EXPECT_EQ(a.size(), 16u);
}

}  // namespace
}  // namespace dreval
