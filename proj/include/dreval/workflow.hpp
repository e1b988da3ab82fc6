#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dreval/evidence.hpp"
#include "dreval/gateway.hpp"
#include "dreval/labels.hpp"
#include "dreval/report.hpp"

namespace dreval {

struct Claim {
  std::string text;
  Span source_span;                     // span of the sentence the claim came from
  std::vector<std::string> cited_urls;  // normalized
  bool verifiable = true;
  std::optional<std::size_t> sentence_index;
  std::string category;  // judge's classification, e.g. "factual", "meta"
};

struct Passage {
  std::string url;
  std::string text;  // verbatim substring of the fetched document
};

struct EvidenceBundle {
  std::vector<Passage> supporting;
  std::vector<Passage> opposing;
  bool empty() const { return supporting.empty() && opposing.empty(); }
};

struct WorkflowOptions {
  Date today;
  std::size_t max_claims = 30;
  std::size_t queries_per_claim = 3;
  int results_per_query = 8;
  std::size_t fetches_per_claim = 5;
  std::size_t workers = 8;
};

/// Salient factual claims, at most `n`, in emission order. The judge sees
/// today's date to resolve temporal references. Throws EmptyReport when
/// the report has no prose sentences.
std::vector<Claim> extract_key_claims(Gateway& gateway, const Report& report, Date today, std::size_t n = 30);

/// Two to four (at most `max_queries` kept) searches that do not presuppose
/// the claim's values. Queries carrying one of the claim's numeric tokens
/// are dropped; if none survive, a keyword query is derived locally.
std::vector<SearchQuery> neutralize_queries(Gateway& gateway, const Claim& claim, Date today,
                                            std::size_t max_queries = 3);

/// Tokens of `claim` that a neutral query must not repeat.
std::vector<std::string> claim_value_tokens(std::string_view claim);

/// Supporting and opposing passes over the successfully fetched documents.
/// Quotes that are not verbatim in their document are discarded.
EvidenceBundle dual_stream_extract(Gateway& gateway, const Claim& claim, const std::vector<FetchedDocument>& docs);

struct FactualityJudgment {
  FactualityLabel label = FactualityLabel::Unverifiable;
  std::string rationale;
};

/// An empty bundle is Unverifiable without consulting the judge.
FactualityJudgment judge_factuality(Gateway& gateway, const Claim& claim, const EvidenceBundle& bundle, Date today);

struct FactualityRecord {
  Claim claim;
  std::vector<std::string> queries;
  std::vector<std::string> evidence_urls;
  EvidenceBundle evidence;
  FactualityJudgment judgment;
  std::optional<std::string> diagnostic;
};

struct FactualityRun {
  LabelCounts counts;
  std::vector<FactualityRecord> records;
  std::vector<std::string> diagnostics;
};

/// Neutral queries, search, top snippets fetched, dual-stream extraction,
/// judgment. Errors become Unverifiable with a diagnostic.
FactualityRecord verify_claim(Gateway& gateway, EvidenceTools& evidence, const Claim& claim,
                              const WorkflowOptions& options);

/// Per-claim failures become Unverifiable with a diagnostic.
FactualityRun run_factuality(Gateway& gateway, EvidenceTools& evidence, const Report& report,
                             const WorkflowOptions& options);

/// Sentence classification. Non-verifiable claims are returned with
/// verifiable = false. A citation attaches to claims of its own sentence,
/// else to claims of the immediately preceding sentence.
std::vector<Claim> extract_verifiable_claims(Gateway& gateway, const Report& report);

struct SourceJudgment {
  std::string url;
  FetchStatus status = FetchStatus::NotFound;
  FaithfulnessLabel label = FaithfulnessLabel::Unverifiable;
  std::string rationale;
};

/// A source that did not load is Unverifiable without consulting the judge.
SourceJudgment judge_citation_faithfulness(Gateway& gateway, const Claim& claim, const FetchedDocument& source);

/// Best label across sources; Unverifiable for an empty list.
FaithfulnessLabel best_label(const std::vector<SourceJudgment>& sources);

struct CitationRecord {
  Claim claim;
  std::vector<SourceJudgment> sources;
  FaithfulnessLabel label = FaithfulnessLabel::Unverifiable;
  std::optional<std::string> diagnostic;
};

struct CiRun {
  std::int64_t n_cited = 0;
  std::int64_t n_total = 0;
  LabelCounts cf_counts;
  std::vector<Claim> excluded;           // verifiable = false
  std::vector<CitationRecord> records;   // verifiable claims, cited or not
  std::vector<std::string> diagnostics;  // "NoVerifiableClaims" when n_total = 0
};

inline constexpr std::string_view kNoVerifiableClaims = "NoVerifiableClaims";

CiRun run_ci(Gateway& gateway, EvidenceTools& evidence, const Report& report, const WorkflowOptions& options);

struct DomainRecord {
  DomainRating rating;
  std::vector<std::string> urls;
  bool host_fallback = false;
  std::optional<std::string> diagnostic;
};

struct DaRun {
  std::vector<DomainRating> ratings;
  std::vector<DomainRecord> records;
  std::vector<std::string> diagnostics;
};

/// One judged rating per distinct root domain among the report's citations.
/// A failed rating degrades to score 1 / Other.
DaRun run_da(Gateway& gateway, const Report& report, const WorkflowOptions& options);

json to_json(const Claim& c);
json to_json(const FactualityRecord& r);
json to_json(const CitationRecord& r);
json to_json(const DomainRecord& r);

/// One JSON document per line.
void write_jsonl(const std::filesystem::path& file, const std::vector<json>& records);

}  // namespace dreval
