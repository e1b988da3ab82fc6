#include <gtest/gtest.h>

#include <cstdlib>

#include "dreval/config.hpp"
#include "dreval/error.hpp"
#include "dreval/io.hpp"
#include "dreval/results.hpp"
#include "support.hpp"

namespace dreval {
namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

TEST(Config, DefaultsAndRelativePaths) {
  const auto c = config_from_json(json::object(), "/base");
  EXPECT_EQ(c.mode, BackendMode::Replay);
  EXPECT_EQ(c.min_kic, 8);
  EXPECT_EQ(c.max_kic, 16);
  EXPECT_EQ(c.min_rq, 3);
  EXPECT_EQ(c.max_rq, 6);
  EXPECT_EQ(c.max_claims, 30u);
  EXPECT_EQ(c.protocol_dir, std::filesystem::path("/base/protocols"));
  const auto abs = config_from_json({{"paths", {{"results_dir", "/elsewhere"}}}}, "/base");
  EXPECT_EQ(abs.results_dir, std::filesystem::path("/elsewhere"));
}

TEST(Config, RoundTripThroughSnapshot) {
  const json in{{"version", 1},
                {"mode", "record"},
                {"provider", {{"base_url", "http://localhost:9"}, {"model", "m"}, {"timeout_s", 30}}},
                {"workers", 3},
                {"item_workers", 5},
                {"today", "2025-12-23"},
                {"cutoff_date", "2025-01-01"},
                {"kic_items", {4, 10}},
                {"rq_items", {2, 5}},
                {"rq_step_budget", 9}};
  const auto c = config_from_json(in, "/base");
  const auto back = config_from_json(to_json(c), "/base");
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.mode, BackendMode::Record);
  EXPECT_EQ(back.today, testing::ymd(2025, 12, 23));
  EXPECT_EQ(back.cutoff_date, testing::ymd(2025, 1, 1));
  EXPECT_EQ(back.max_kic, 10);
  EXPECT_EQ(back.rq_step_budget, 9);
  EXPECT_EQ(back.provider.timeout, std::chrono::seconds(30));
}

TEST(Config, UnknownKeysAndBadValues) {
  EXPECT_EQ(code_of([] { config_from_json({{"wokers", 2}}, "/"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"provider", {{"api_key", "x"}}}}, "/"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"paths", {{"tmp", "x"}}}}, "/"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"mode", "offline"}}, "/"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"today", "23/12/2025"}}, "/"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"kic_items", {9, 3}}}, "/"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"workers", 0}}, "/"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"evidence", {{"backend", "ftp"}}}}, "/"); }), Errc::ConfigError);
  EXPECT_EQ(code_of([] { config_from_json({{"version", 2}}, "/"); }), Errc::SchemaVersionMismatch);
}

TEST(Config, ApiKeyComesFromEnvironmentAndIsNeverSerialized) {
  RunConfig c;
  ::setenv(std::string(kEnvApiKey).c_str(), "sk-test-secret", 1);
  ::setenv(std::string(kEnvModel).c_str(), "judge-model", 1);
  apply_environment(c);
  ::unsetenv(std::string(kEnvApiKey).c_str());
  ::unsetenv(std::string(kEnvModel).c_str());
  EXPECT_EQ(c.provider.api_key, "sk-test-secret");
  EXPECT_EQ(c.provider.model, "judge-model");
  const auto dumped = to_json(c).dump();
  EXPECT_EQ(dumped.find("sk-test-secret"), std::string::npos);
  EXPECT_EQ(dumped.find("api_key"), std::string::npos);
}

TEST(Config, Validation) {
  testing::TempDir dir;
  RunConfig c;
  c.fixture_dir = dir / "missing";
  EXPECT_EQ(code_of([&] { validate_config(c); }), Errc::FixtureMiss);
  c.fixture_dir = dir.path();
  c.evidence.corpus = dir / "pages.json";
  write_file_atomic(c.evidence.corpus, "[]");
  EXPECT_NO_THROW(validate_config(c));

  c.mode = BackendMode::Live;
  EXPECT_EQ(code_of([&] { validate_config(c); }), Errc::ConfigError);
  c.provider.base_url = "http://localhost:1";
  c.provider.model = "m";
  EXPECT_EQ(code_of([&] { validate_config(c); }), Errc::ConfigError);
  c.provider.api_key = "k";
  EXPECT_NO_THROW(validate_config(c));
}

Scorecard sample_card() {
  Scorecard s;
  s.task_id = "t1";
  s.run_id = "0123456789abcdef";
  s.wq = 0.8;
  s.factuality = 0.75;
  s.ca = 0.5;
  s.cf = std::nullopt;
  s.ci = std::nullopt;
  s.kic = 7.0 / 12.0;
  s.diagnostics.undefined_metrics = {"ci", "cf"};
  s.diagnostics.unverifiable_fraction = 0.25;
  s.diagnostics.excluded_counts = {{"cf_unverifiable", 3}};
  s.diagnostics.notes = {"ci: cf undefined"};
  return s;
}

TEST(Scorecard, RoundTripKeepsUndefinedAsNull) {
  const auto card = sample_card();
  const auto j = to_json(card);
  EXPECT_TRUE(j.at("scores").at("cf").is_null());
  EXPECT_TRUE(j.at("scores").at("da").is_null());
  EXPECT_EQ(j.at("version"), kScorecardVersion);
  const auto back = scorecard_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.kic, card.kic);
  EXPECT_FALSE(back.cf);
}

TEST(Scorecard, FilesAndErrors) {
  testing::TempDir dir;
  write_file_atomic(dir / "b.scorecard.json", to_json(sample_card()).dump());
  write_file_atomic(dir / "a.scorecard.json", to_json(sample_card()).dump());
  write_file_atomic(dir / "notes.json", "{}");
  const auto files = scorecard_files(dir.path());
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].filename(), "a.scorecard.json");

  auto j = to_json(sample_card());
  j["version"] = 7;
  EXPECT_EQ(code_of([&] { scorecard_from_json(j); }), Errc::SchemaVersionMismatch);
  write_file_atomic(dir / "bad.scorecard.json", "{\"version\": 1, \"task_id\": ");
  EXPECT_EQ(code_of([&] { load_scorecard(dir / "bad.scorecard.json"); }), Errc::CorruptFile);
}

TEST(Scorecard, TableAndAggregateDocument) {
  const std::vector<Scorecard> cards{sample_card()};
  const auto agg = aggregate(cards);
  const auto table = format_table(cards, agg);
  EXPECT_NE(table.find("t1"), std::string::npos);
  EXPECT_NE(table.find("80.00"), std::string::npos);
  EXPECT_NE(table.find("58.33"), std::string::npos);
  const auto j = aggregate_to_json(agg, "rid");
  EXPECT_EQ(j.at("run_id"), "rid");
  EXPECT_EQ(j.at("task_count"), 1);
}

}  // namespace
}  // namespace dreval
