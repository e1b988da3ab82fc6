#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "dreval/app.hpp"
#include "dreval/error.hpp"
#include "dreval/io.hpp"
#include "dreval/text.hpp"
#include "dreval/url.hpp"
#include "dreval/workflow.hpp"
#include "scripted/fixture_set.hpp"
#include "scripted/scripted_judge.hpp"
#include "support.hpp"

namespace dreval {
namespace {

using testing::FnBackend;
using Handler = std::function<json(const JudgeRequest&)>;

// Dispatches on the schema title; unknown titles fail the test.
std::shared_ptr<FnBackend> routed(std::map<std::string, Handler> handlers) {
  return std::make_shared<FnBackend>([handlers = std::move(handlers)](const JudgeRequest& req) {
    const auto title = req.output_schema.value("title", "");
    auto it = handlers.find(title);
    if (it == handlers.end()) {
      ADD_FAILURE() << "unexpected judge call: " << title;
      return std::string("{}");
    }
    return it->second(req).dump();
  });
}

std::string section_of(const std::string& prompt, const std::string& name) {
  const auto tag = "### " + name + "\n";
  auto pos = prompt.find(tag);
  if (pos == std::string::npos) return "";
  pos += tag.size();
  const auto end = prompt.find("\n###", pos);
  return prompt.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

WorkflowOptions options() {
  WorkflowOptions o;
  o.today = testing::ymd(2025, 12, 23);
  o.workers = 4;
  return o;
}

FetchedDocument ok_doc(std::string url, std::string text) {
  return {std::move(url), std::move(text), "2025-12-23T00:00:00Z", FetchStatus::Ok};
}

// Key claims

TEST(KeyClaims, ClaimsPointAtTheirSentences) {
  const auto report = testing::report_of("GDP grew 3% in 2023. Unemployment fell to 4% in 2024.");
  auto backend = routed({{"key_claims", [](const JudgeRequest&) {
                            return json{{"claims",
                                         {{{"sentence_index", 0}, {"claim", "GDP grew 3% in 2023."}},
                                          {{"sentence_index", 1}, {"claim", "Unemployment fell to 4% in 2024."}}}}};
                          }}});
  auto gw = testing::live_gateway(backend);
  const auto claims = extract_key_claims(*gw, report, testing::ymd(2025, 1, 1));
  ASSERT_EQ(claims.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(claims[i].sentence_index, i);
    EXPECT_EQ(claims[i].source_span, report.sentences[i].span);
  }
}

TEST(KeyClaims, TruncatesAndDropsBadIndices) {
  const auto report = testing::report_of("One fact here. Two facts here.");
  auto backend = routed({{"key_claims", [](const JudgeRequest&) {
                            json claims = json::array();
                            claims.push_back({{"sentence_index", 7}, {"claim", "out of range"}});
                            for (int i = 0; i < 35; ++i) {
                              claims.push_back({{"sentence_index", i % 2}, {"claim", "claim " + std::to_string(i)}});
                            }
                            return json{{"claims", claims}};
                          }}});
  auto gw = testing::live_gateway(backend);
  const auto claims = extract_key_claims(*gw, report, testing::ymd(2025, 1, 1));
  ASSERT_EQ(claims.size(), 30u);
  EXPECT_EQ(claims.front().text, "claim 0");
  EXPECT_EQ(claims.back().text, "claim 29");
}

TEST(KeyClaims, TodayReachesTheJudge) {
  std::string seen;
  auto backend = routed({{"key_claims", [&](const JudgeRequest& r) {
                            seen = section_of(r.user_prompt, "TODAY");
                            return json{{"claims", json::array()}};
                          }}});
  auto gw = testing::live_gateway(backend);
  extract_key_claims(*gw, testing::report_of("Some prose sentence."), testing::ymd(2025, 3, 9));
  EXPECT_EQ(seen, "2025-03-09");
}

TEST(KeyClaims, LinkOnlyReportIsEmpty) {
  auto gw = testing::live_gateway(testing::constant_backend({{"claims", json::array()}}));
  try {
    extract_key_claims(*gw, testing::report_of("[source](https://example.com/a)"), testing::ymd(2025, 1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyReport);
  }
}

// Query neutralization

TEST(Neutralize, ScriptedJudgeAsksAboutTheTopic) {
  auto gw = testing::live_gateway(scripted::make_scripted_judge());
  Claim claim;
  claim.text = "Inflation dropped to 2% in 2024.";
  const auto queries = neutralize_queries(*gw, claim, testing::ymd(2025, 1, 1));
  ASSERT_FALSE(queries.empty());
  EXPECT_TRUE(std::any_of(queries.begin(), queries.end(),
                          [](const SearchQuery& q) { return q.text.find("current inflation rate") != std::string::npos; }));
}

TEST(Neutralize, FallsBackToKeywordsWhenEveryQueryLeaks) {
  auto gw = testing::live_gateway(testing::constant_backend({{"queries", {"inflation 2%", "2024 inflation"}}}));
  Claim claim;
  claim.text = "Inflation dropped to 2% in 2024.";
  const auto queries = neutralize_queries(*gw, claim, testing::ymd(2025, 1, 1));
  ASSERT_EQ(queries.size(), 1u);
  EXPECT_TRUE(text::numeric_tokens(queries[0].text).empty());
  EXPECT_NE(queries[0].text.find("inflation"), std::string::npos);
}

// Whatever the judge proposes, no surviving query repeats a value of the claim.
TEST(Neutralize, NoQueryRepeatsAClaimValue) {
  std::mt19937_64 rng(testing::kPropertySeed);
  const std::vector<std::string> subjects{"inflation", "unemployment", "the policy rate", "wage growth", "exports"};
  const std::vector<std::string> verbs{"rose to", "fell to", "reached", "stood at"};
  for (int trial = 0; trial < 200; ++trial) {
    const auto value = std::to_string(rng() % 40) + (rng() % 2 ? "." + std::to_string(rng() % 10) : "");
    const auto year = std::to_string(2000 + rng() % 26);
    Claim claim;
    claim.text = "In " + year + " " + subjects[rng() % subjects.size()] + " " + verbs[rng() % verbs.size()] + " " +
                 value + "%.";
    json queries = json::array();
    const auto n = 2 + rng() % 3;
    for (std::size_t i = 0; i < n; ++i) {
      switch (rng() % 4) {
        case 0: queries.push_back("rate " + value + "%"); break;
        case 1: queries.push_back("figures for " + year); break;
        case 2: queries.push_back("official statistics"); break;
        default: queries.push_back("latest " + std::to_string(rng() % 100) + " data");
      }
    }
    auto gw = testing::live_gateway(testing::constant_backend({{"queries", queries}}));
    const auto out = neutralize_queries(*gw, claim, testing::ymd(2025, 1, 1));
    ASSERT_FALSE(out.empty()) << claim.text;
    EXPECT_LE(out.size(), 3u);
    const auto banned = claim_value_tokens(claim.text);
    for (const auto& q : out) {
      for (const auto& t : text::numeric_tokens(q.text)) {
        EXPECT_EQ(std::count(banned.begin(), banned.end(), t), 0) << claim.text << " -> " << q.text;
      }
    }
  }
}

// Dual-stream extraction

TEST(DualStream, KeepsOnlyVerbatimQuotes) {
  auto backend = routed({{"evidence_supporting",
                          [](const JudgeRequest&) {
                            return json{{"passages",
                                         {{{"doc", 0}, {"quote", "Inflation was 2%."}},
                                          {{"doc", 0}, {"quote", "Inflation was roughly 2%."}},
                                          {{"doc", 3}, {"quote", "Inflation was 2%."}}}}};
                          }},
                         {"evidence_opposing", [](const JudgeRequest&) { return json{{"passages", json::array()}}; }}});
  auto gw = testing::live_gateway(backend);
  Claim claim;
  claim.text = "Inflation was 2%.";
  const std::vector<FetchedDocument> docs{ok_doc("https://a.org/x", "Report. Inflation was 2%. End.")};
  const auto bundle = dual_stream_extract(*gw, claim, docs);
  ASSERT_EQ(bundle.supporting.size(), 1u);
  EXPECT_EQ(bundle.supporting[0].text, "Inflation was 2%.");
  EXPECT_EQ(bundle.supporting[0].url, "https://a.org/x");
  EXPECT_TRUE(bundle.opposing.empty());
}

TEST(DualStream, PlantedRefutationLandsInOpposing) {
  auto gw = testing::live_gateway(scripted::make_scripted_judge());
  Claim claim;
  claim.text = "Annual inflation in Freedonia fell to 2 percent in 2024.";
  const std::vector<FetchedDocument> docs{
      ok_doc("https://stats.example.gov/cpi", "Annual inflation in Freedonia fell to 2 percent in 2024, officials said."),
      ok_doc("https://audit.example.org/review",
             "An audit found annual inflation in Freedonia fell to 5 percent in 2024, not the reported figure.")};
  const auto bundle = dual_stream_extract(*gw, claim, docs);
  ASSERT_FALSE(bundle.opposing.empty());
  EXPECT_TRUE(std::all_of(bundle.opposing.begin(), bundle.opposing.end(),
                          [](const Passage& p) { return p.url == "https://audit.example.org/review"; }));
  ASSERT_FALSE(bundle.supporting.empty());
  EXPECT_EQ(bundle.supporting[0].url, "https://stats.example.gov/cpi");
  for (const auto& list : {bundle.supporting, bundle.opposing}) {
    for (const auto& p : list) {
      const auto& doc = p.url == docs[0].url ? docs[0] : docs[1];
      EXPECT_NE(doc.content_text.find(p.text), std::string::npos);
    }
  }
}

TEST(DualStream, NoUsableDocumentsNoCall) {
  auto backend = routed({});
  auto gw = testing::live_gateway(backend);
  Claim claim;
  claim.text = "x";
  std::vector<FetchedDocument> docs{{"https://a.org", "", "", FetchStatus::Paywalled}};
  EXPECT_TRUE(dual_stream_extract(*gw, claim, {}).empty());
  EXPECT_TRUE(dual_stream_extract(*gw, claim, docs).empty());
  EXPECT_EQ(backend->calls(), 0u);
}

TEST(JudgeFactuality, EmptyBundleIsUnverifiableWithoutCall) {
  auto backend = routed({});
  auto gw = testing::live_gateway(backend);
  Claim claim;
  claim.text = "x";
  EXPECT_EQ(judge_factuality(*gw, claim, {}, testing::ymd(2025, 1, 1)).label, FactualityLabel::Unverifiable);
  EXPECT_EQ(backend->calls(), 0u);
}

// Full factuality runs over a small synthetic web.

struct SmallWeb {
  std::shared_ptr<testing::MapPages> pages = std::make_shared<testing::MapPages>();
  std::shared_ptr<EvidenceTools> tools;
  explicit SmallWeb(bool pages_load = true) {
    std::vector<SearchResult> results;
    for (int i = 0; i < 3; ++i) {
      const auto url = "https://source" + std::to_string(i) + ".org/page";
      results.push_back({url, "Source " + std::to_string(i), "claim evidence", parse_partial_date("2025-01-01")});
      if (pages_load) pages->add_text(url, "Evidence for claim number " + std::to_string(i) + ".");
    }
    tools = testing::evidence_over(std::make_shared<testing::ListSearch>(results), pages);
  }
};

std::shared_ptr<FnBackend> tally_backend(std::vector<std::string> labels) {
  return routed({
      {"key_claims",
       [n = labels.size()](const JudgeRequest&) {
         json claims = json::array();
         for (std::size_t i = 0; i < n; ++i) claims.push_back({{"sentence_index", 0}, {"claim", "claim " + std::to_string(i)}});
         return json{{"claims", claims}};
       }},
      {"neutral_queries", [](const JudgeRequest&) { return json{{"queries", {"topic a", "topic b"}}}; }},
      {"evidence_supporting",
       [](const JudgeRequest&) { return json{{"passages", {{{"doc", 0}, {"quote", "Evidence for claim"}}}}}; }},
      {"evidence_opposing", [](const JudgeRequest&) { return json{{"passages", json::array()}}; }},
      {"factuality_verdict",
       [labels](const JudgeRequest& r) {
         const auto claim = section_of(r.user_prompt, "CLAIM");
         const auto i = std::stoul(claim.substr(claim.find(' ') + 1));
         return json{{"label", labels.at(i)}, {"rationale", "scripted"}};
       }},
  });
}

TEST(Factuality, TalliesAllSupported) {
  SmallWeb web;
  auto gw = testing::live_gateway(tally_backend(std::vector<std::string>(6, "Supported")));
  const auto run = run_factuality(*gw, *web.tools, testing::report_of("A sentence of prose."), options());
  EXPECT_EQ(run.counts, (LabelCounts{6, 0, 0, 0, 0}));
  EXPECT_EQ(run.records.size(), 6u);
  EXPECT_TRUE(run.diagnostics.empty());
}

TEST(Factuality, TalliesMixedLabels) {
  SmallWeb web;
  auto gw = testing::live_gateway(tally_backend(
      {"Supported", "PartiallySupported", "Supported", "Contradicted", "PartiallySupported", "Supported"}));
  const auto run = run_factuality(*gw, *web.tools, testing::report_of("A sentence of prose."), options());
  EXPECT_EQ(run.counts, (LabelCounts{3, 2, 0, 1, 0}));
  for (std::size_t i = 0; i < run.records.size(); ++i) EXPECT_EQ(run.records[i].claim.text, "claim " + std::to_string(i));
}

TEST(Factuality, FailedFetchesMakeClaimsUnverifiable) {
  SmallWeb web(false);
  auto backend = tally_backend(std::vector<std::string>(4, "Supported"));
  auto gw = testing::live_gateway(backend);
  const auto run = run_factuality(*gw, *web.tools, testing::report_of("A sentence of prose."), options());
  EXPECT_EQ(run.counts, (LabelCounts{0, 0, 0, 0, 4}));
  // key claims + one neutralization per claim; no extraction or verdict calls
  EXPECT_EQ(backend->calls(), 5u);
}

TEST(Factuality, SearchOutageBecomesDiagnostic) {
  struct Down final : SearchBackend {
    std::vector<SearchResult> search(const SearchQuery&) override {
      throw Error(Errc::BackendUnavailable, "search down");
    }
  };
  auto tools = testing::evidence_over(std::make_shared<Down>(), std::make_shared<testing::MapPages>());
  auto gw = testing::live_gateway(tally_backend({"Supported", "Supported"}));
  const auto run = run_factuality(*gw, *tools, testing::report_of("A sentence of prose."), options());
  EXPECT_EQ(run.counts.unverifiable, 2);
  EXPECT_EQ(run.diagnostics.size(), 2u);
  for (const auto& r : run.records) EXPECT_TRUE(r.diagnostic.has_value());
}

// Citation workflow

TEST(VerifiableClaims, ExcludesMetaAndCommonKnowledge) {
  auto gw = testing::live_gateway(scripted::make_scripted_judge());
  const auto report = testing::report_of(
      "The following section discusses wages. Water boils at 100 degrees Celsius at sea level. "
      "Median wages rose 4% in 2024 according to the bureau.");
  const auto claims = extract_verifiable_claims(*gw, report);
  ASSERT_EQ(claims.size(), 3u);
  EXPECT_EQ(claims[0].category, "meta");
  EXPECT_EQ(claims[1].category, "common_knowledge");
  EXPECT_EQ(claims[2].category, "factual");
  EXPECT_FALSE(claims[0].verifiable);
  EXPECT_FALSE(claims[1].verifiable);
  EXPECT_TRUE(claims[2].verifiable);
}

TEST(VerifiableClaims, TrailingLinkAttachesToPrecedingSentence) {
  const auto report = testing::report_of("Median wages rose 4% in 2024.\n\n[Bureau release](https://Stats.Example.gov/wages/)\n");
  ASSERT_EQ(report.sentences.size(), 2u);
  auto backend = routed({{"verifiable_claims", [](const JudgeRequest&) {
                            return json{{"claims", {{{"sentence_index", 0}, {"claim", "Median wages rose 4% in 2024."},
                                                      {"category", "factual"}}}}};
                          }}});
  auto gw = testing::live_gateway(backend);
  const auto claims = extract_verifiable_claims(*gw, report);
  ASSERT_EQ(claims.size(), 1u);
  EXPECT_EQ(claims[0].cited_urls, (std::vector<std::string>{normalize_url("https://Stats.Example.gov/wages/")}));
}

std::string cited_report(int sentences, int cited) {
  std::string md;
  for (int i = 0; i < sentences; ++i) {
    md += "Fact number " + std::to_string(i) + " holds";
    if (i < cited) md += " [src](https://src" + std::to_string(i) + ".org/p)";
    md += ". ";
  }
  return md;
}

std::shared_ptr<FnBackend> ci_backend(const std::string& category, const std::string& label) {
  return routed({{"verifiable_claims",
                  [category](const JudgeRequest& r) {
                    json claims = json::array();
                    const auto listed = section_of(r.user_prompt, "SENTENCES");
                    std::size_t pos = 0;
                    while ((pos = listed.find('[', pos)) != std::string::npos && pos + 1 < listed.size() &&
                           std::isdigit(static_cast<unsigned char>(listed[pos + 1]))) {
                      const auto idx = std::stoul(listed.substr(pos + 1));
                      claims.push_back({{"sentence_index", idx}, {"claim", "fact " + std::to_string(idx)}, {"category", category}});
                      pos = listed.find('\n', pos);
                      if (pos == std::string::npos) break;
                    }
                    return json{{"claims", claims}};
                  }},
                 {"citation_faithfulness", [label](const JudgeRequest&) {
                    return json{{"label", label}, {"rationale", "scripted"}};
                  }}});
}

std::shared_ptr<EvidenceTools> cited_pages(int n) {
  auto pages = std::make_shared<testing::MapPages>();
  for (int i = 0; i < n; ++i) pages->add_text("https://src" + std::to_string(i) + ".org/p", "Source text.");
  return testing::evidence_over(std::make_shared<testing::ListSearch>(std::vector<SearchResult>{}), pages);
}

TEST(Ci, TenVerifiableSevenCited) {
  const auto report = testing::report_of(cited_report(10, 7));
  auto gw = testing::live_gateway(ci_backend("factual", "Supported"));
  const auto run = run_ci(*gw, *cited_pages(7), report, options());
  EXPECT_EQ(run.n_total, 10);
  EXPECT_EQ(run.n_cited, 7);
  EXPECT_EQ(run.cf_counts, (LabelCounts{7, 0, 0, 0, 0}));
  EXPECT_EQ(run.records.size(), 10u);
}

TEST(Ci, NoCitations) {
  const auto report = testing::report_of(cited_report(5, 0));
  auto backend = ci_backend("factual", "Supported");
  auto gw = testing::live_gateway(backend);
  const auto run = run_ci(*gw, *cited_pages(0), report, options());
  EXPECT_EQ(run.n_total, 5);
  EXPECT_EQ(run.n_cited, 0);
  EXPECT_EQ(run.cf_counts.total(), 0);
  EXPECT_EQ(backend->calls(), 1u);
}

TEST(Ci, NoVerifiableClaimsIsDiagnosed) {
  const auto report = testing::report_of(cited_report(4, 2));
  auto gw = testing::live_gateway(ci_backend("meta", "Supported"));
  const auto run = run_ci(*gw, *cited_pages(2), report, options());
  EXPECT_EQ(run.n_total, 0);
  EXPECT_EQ(run.excluded.size(), 4u);
  EXPECT_EQ(run.diagnostics, (std::vector<std::string>{std::string(kNoVerifiableClaims)}));
}

TEST(Ci, MissingSourceIsUnverifiable) {
  const auto report = testing::report_of(cited_report(3, 3));
  auto backend = ci_backend("factual", "Supported");
  auto gw = testing::live_gateway(backend);
  const auto run = run_ci(*gw, *cited_pages(0), report, options());
  EXPECT_EQ(run.n_cited, 3);
  EXPECT_EQ(run.cf_counts.unverifiable, 3);
  EXPECT_EQ(backend->calls(), 1u);
}

TEST(CitationFaithfulness, UnloadedSourceSkipsJudge) {
  auto backend = routed({});
  auto gw = testing::live_gateway(backend);
  Claim claim;
  claim.text = "x";
  for (auto st : {FetchStatus::NotFound, FetchStatus::Paywalled, FetchStatus::Blocked, FetchStatus::Timeout}) {
    const auto j = judge_citation_faithfulness(*gw, claim, {"https://a.org", "", "", st});
    EXPECT_EQ(j.label, FaithfulnessLabel::Unverifiable);
    EXPECT_EQ(j.status, st);
  }
  EXPECT_EQ(backend->calls(), 0u);
}

TEST(CitationFaithfulness, BestSourceWins) {
  auto judged = [](std::initializer_list<FaithfulnessLabel> labels) {
    std::vector<SourceJudgment> out;
    for (auto l : labels) out.push_back({"u", FetchStatus::Ok, l, ""});
    return out;
  };
  using L = FaithfulnessLabel;
  EXPECT_EQ(best_label({}), L::Unverifiable);
  EXPECT_EQ(best_label(judged({L::Neutral, L::Contradicted, L::PartiallySupported})), L::PartiallySupported);
  EXPECT_EQ(best_label(judged({L::Unverifiable, L::Contradicted})), L::Contradicted);
  EXPECT_EQ(best_label(judged({L::Contradicted, L::Neutral})), L::Neutral);
  EXPECT_EQ(best_label(judged({L::PartiallySupported, L::Supported})), L::Supported);
}

// Domain authority

TEST(Da, OneRatingPerRootDomain) {
  const auto report = testing::report_of(
      "A [x](https://www.nature.com/articles/a). B [y](https://nature.com/b). C [z](https://example.com/c).");
  auto backend = std::make_shared<FnBackend>([](const JudgeRequest&) {
    return json{{"category", "Academic"}, {"score", 8}, {"rationale", "r"}}.dump();
  });
  auto gw = testing::live_gateway(backend);
  const auto run = run_da(*gw, report, options());
  ASSERT_EQ(run.ratings.size(), 2u);
  EXPECT_EQ(run.ratings[0].domain.value, "nature.com");
  EXPECT_EQ(run.ratings[1].domain.value, "example.com");
  EXPECT_EQ(run.records[0].urls.size(), 2u);
  EXPECT_EQ(backend->calls(), 2u);
}

TEST(Da, ScriptedBands) {
  const auto report = testing::report_of(
      "A [x](https://www.census.gov/data). B [y](https://twitter.com/someone/status/1). "
      "C [z](https://www.reddit.com/r/economics).");
  auto gw = testing::live_gateway(scripted::make_scripted_judge());
  const auto run = run_da(*gw, report, options());
  ASSERT_EQ(run.ratings.size(), 3u);
  EXPECT_EQ(run.ratings[0].category, DomainCategory::Government);
  EXPECT_GE(run.ratings[0].score, 9);
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_GE(run.ratings[i].score, 1);
    EXPECT_LE(run.ratings[i].score, 3);
  }
}

TEST(Da, FailedRatingDegradesToLowest) {
  const auto report = testing::report_of("A [x](https://example.com/a).");
  auto gw = testing::live_gateway(testing::constant_backend({{"category", "News"}, {"score", 42}, {"rationale", ""}}));
  const auto run = run_da(*gw, report, options());
  ASSERT_EQ(run.ratings.size(), 1u);
  EXPECT_EQ(run.ratings[0].score, 1);
  EXPECT_EQ(run.ratings[0].category, DomainCategory::Other);
  EXPECT_EQ(run.diagnostics.size(), 1u);
}

TEST(Da, HostWithoutRegistrableDomain) {
  const auto report = testing::report_of("A [x](http://intranet/a).");
  auto backend = routed({});
  auto gw = testing::live_gateway(backend);
  const auto run = run_da(*gw, report, options());
  ASSERT_EQ(run.records.size(), 1u);
  EXPECT_TRUE(run.records[0].host_fallback);
  EXPECT_EQ(run.ratings[0].score, 1);
  EXPECT_EQ(backend->calls(), 0u);
}

// Replayed fixture runs

class FixtureWorkflow : public ::testing::Test {
 protected:
  void SetUp() override {
    set_ = fixtures::load_fixture_set(DREVAL_FIXTURE_DIR, scratch_.path());
    rt_ = fixtures::make_runtime(set_);
  }
  testing::TempDir scratch_;
  fixtures::FixtureSet set_;
  fixtures::FixtureRuntime rt_;
};

TEST_F(FixtureWorkflow, CountsAreConservedAndPassagesVerbatim) {
  const auto opts = workflow_options(set_.config);
  for (const auto& t : set_.tasks) {
    const auto report = parse_report(read_file(*t.report), t.task_id, t.query);
    const auto fact = run_factuality(*rt_.gateway, *rt_.evidence, report, opts);
    EXPECT_EQ(fact.counts.total(), static_cast<std::int64_t>(fact.records.size()));
    EXPECT_LE(fact.records.size(), opts.max_claims);
    EXPECT_EQ(fact.counts.neutral, 0);
    for (const auto& rec : fact.records) {
      for (const auto* list : {&rec.evidence.supporting, &rec.evidence.opposing}) {
        for (const auto& p : *list) {
          const auto doc = rt_.evidence->fetch(p.url);
          EXPECT_NE(doc.content_text.find(p.text), std::string::npos) << t.task_id << ": " << p.text;
        }
      }
      if (rec.evidence.empty()) {
        EXPECT_EQ(rec.judgment.label, FactualityLabel::Unverifiable);
      }
    }
    const auto ci = run_ci(*rt_.gateway, *rt_.evidence, report, opts);
    EXPECT_LE(ci.n_cited, ci.n_total);
    EXPECT_EQ(ci.cf_counts.total(), ci.n_cited);
    EXPECT_EQ(static_cast<std::int64_t>(ci.records.size()), ci.n_total);
    for (const auto& c : ci.excluded) EXPECT_FALSE(c.verifiable);
    const auto da = run_da(*rt_.gateway, report, opts);
    for (const auto& r : da.ratings) {
      EXPECT_GE(r.score, 1);
      EXPECT_LE(r.score, 10);
    }
  }
}

TEST_F(FixtureWorkflow, OutdatedTikTokClaimIsContradicted) {
  const auto& t = set_.task("tiktok");
  const auto report = parse_report(read_file(*t.report), t.task_id, t.query);
  const auto run = run_factuality(*rt_.gateway, *rt_.evidence, report, workflow_options(set_.config));
  EXPECT_GE(run.counts.contradicted, 1);
}

}  // namespace
}  // namespace dreval
