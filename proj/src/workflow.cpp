#include "dreval/workflow.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dreval/error.hpp"
#include "dreval/io.hpp"
#include "dreval/parallel.hpp"
#include "dreval/text.hpp"
#include "dreval/url.hpp"

namespace dreval {
namespace {

constexpr std::size_t kDocChars = 6000;

json str() { return {{"type", "string"}}; }
json nonempty_str() { return {{"type", "string"}, {"minLength", 1}}; }
json index_schema() { return {{"type", "integer"}, {"minimum", 0}}; }

json label_enum(std::initializer_list<std::string_view> labels) {
  json arr = json::array();
  for (auto l : labels) arr.push_back(l);
  return {{"type", "string"}, {"enum", arr}};
}

std::string numbered_sentences(const Report& report) {
  std::ostringstream out;
  for (std::size_t i = 0; i < report.sentences.size(); ++i) {
    if (!report.sentences[i].link_only) out << "[" << i << "] " << report.sentences[i].text << "\n";
  }
  return out.str();
}

bool has_prose(const Report& report) {
  return std::any_of(report.sentences.begin(), report.sentences.end(), [](const Sentence& s) { return !s.link_only; });
}

std::string normalized_or_raw(const std::string& url) {
  try {
    return normalize_url(url);
  } catch (const Error&) {
    return url;
  }
}

JudgeRequest request(std::string role, std::string user, json schema) {
  JudgeRequest r;
  r.role_prompt = std::move(role);
  r.user_prompt = std::move(user);
  r.output_schema = std::move(schema);
  return r;
}

std::string documents_block(const std::vector<const FetchedDocument*>& docs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& text_ = docs[i]->content_text;
    out << "[doc " << i << "] " << docs[i]->url << "\n<<<\n"
        << (text_.size() > kDocChars ? text_.substr(0, kDocChars) : text_) << "\n>>>\n";
  }
  return out.str();
}

std::vector<Passage> extract_pass(Gateway& gateway, const Claim& claim, const std::vector<const FetchedDocument*>& docs,
                                  std::string_view stance) {
  const bool supporting = stance == "supporting";
  auto req = request(
      supporting ? "Quote passages from the documents that support the claim, fully or in part. Copy each passage "
                   "verbatim. Return an empty list when nothing supports it."
                 : "Quote passages from the documents that contradict, refute or cast doubt on the claim. Copy each "
                   "passage verbatim. Return an empty list when nothing opposes it.",
      "### CLAIM\n" + claim.text + "\n### STANCE\n" + std::string(stance) + "\n### DOCUMENTS\n" + documents_block(docs),
      {{"title", supporting ? "evidence_supporting" : "evidence_opposing"},
       {"type", "object"},
       {"required", {"passages"}},
       {"properties",
        {{"passages",
          {{"type", "array"},
           {"items",
            {{"type", "object"},
             {"required", {"doc", "quote"}},
             {"properties", {{"doc", index_schema()}, {"quote", nonempty_str()}}}}}}}}}});
  std::vector<Passage> out;
  const auto reply = gateway.complete_structured(req);
  for (const auto& p : reply.payload.at("passages")) {
    const auto doc = p.at("doc").get<std::size_t>();
    const auto quote = p.at("quote").get<std::string>();
    if (doc < docs.size() && docs[doc]->content_text.find(quote) != std::string::npos) {
      out.push_back({docs[doc]->url, quote});
    }
  }
  return out;
}

std::size_t overlap(const std::set<std::string>& a, std::string_view b) {
  std::size_t n = 0;
  for (const auto& t : text::content_tokens(b)) n += a.count(t);
  return n;
}

}  // namespace

std::vector<Claim> extract_key_claims(Gateway& gateway, const Report& report, Date today, std::size_t n) {
  if (!has_prose(report)) throw Error(Errc::EmptyReport, "report " + report.task_id + " has no prose sentences");
  auto req = request(
      "Identify the most salient factual claims in the report: statements about facts, figures, dates, events or "
      "current status that could be checked against outside sources. Skip opinions and meta-commentary. Use today's "
      "date to resolve relative time expressions. Restate each claim as a self-contained sentence and give the "
      "index of the sentence it comes from.",
      "### QUERY\n" + report.query + "\n### TODAY\n" + format_iso_date(today) + "\n### LIMIT\n" + std::to_string(n) +
          "\n### SENTENCES\n" + numbered_sentences(report),
      {{"title", "key_claims"},
       {"type", "object"},
       {"required", {"claims"}},
       {"properties",
        {{"claims",
          {{"type", "array"},
           {"items",
            {{"type", "object"},
             {"required", {"sentence_index", "claim"}},
             {"properties", {{"sentence_index", index_schema()}, {"claim", nonempty_str()}}}}}}}}}});
  std::vector<Claim> claims;
  const auto reply = gateway.complete_structured(req);
  for (const auto& c : reply.payload.at("claims")) {
    if (claims.size() == n) break;
    const auto idx = c.at("sentence_index").get<std::size_t>();
    if (idx >= report.sentences.size()) continue;
    Claim claim;
    claim.text = c.at("claim").get<std::string>();
    claim.sentence_index = idx;
    claim.source_span = report.sentences[idx].span;
    claim.category = "factual";
    claims.push_back(std::move(claim));
  }
  return claims;
}

std::vector<std::string> claim_value_tokens(std::string_view claim) { return text::numeric_tokens(claim); }

std::vector<SearchQuery> neutralize_queries(Gateway& gateway, const Claim& claim, Date today, std::size_t max_queries) {
  auto req = request(
      "Write neutral web search queries for checking the claim. Ask about the underlying topic rather than the "
      "claim's specific conclusion, and never include the claim's figures, so that results are not biased toward "
      "confirming it (for example, search \"current inflation rate\" rather than \"inflation dropped to 2%\").",
      "### CLAIM\n" + claim.text + "\n### TODAY\n" + format_iso_date(today),
      {{"title", "neutral_queries"},
       {"type", "object"},
       {"required", {"queries"}},
       {"properties", {{"queries", {{"type", "array"}, {"minItems", 2}, {"maxItems", 4}, {"items", nonempty_str()}}}}}});
  const auto values = claim_value_tokens(claim.text);
  const std::set<std::string> banned(values.begin(), values.end());
  std::vector<SearchQuery> out;
  const auto reply = gateway.complete_structured(req);
  for (const auto& q : reply.payload.at("queries")) {
    const auto s = q.get<std::string>();
    const auto toks = text::numeric_tokens(s);
    if (std::any_of(toks.begin(), toks.end(), [&](const auto& t) { return banned.contains(t); })) continue;
    if (out.size() < max_queries) out.push_back({s, std::nullopt, 8});
  }
  if (out.empty()) {
    std::string fallback;
    for (const auto& t : text::content_tokens(claim.text)) {
      if (banned.contains(t)) continue;
      if (!fallback.empty()) fallback += ' ';
      fallback += t;
    }
    if (!fallback.empty()) out.push_back({fallback, std::nullopt, 8});
  }
  return out;
}

EvidenceBundle dual_stream_extract(Gateway& gateway, const Claim& claim, const std::vector<FetchedDocument>& docs) {
  std::vector<const FetchedDocument*> usable;
  for (const auto& d : docs) {
    if (d.status == FetchStatus::Ok && !d.content_text.empty()) usable.push_back(&d);
  }
  EvidenceBundle bundle;
  if (usable.empty()) return bundle;
  bundle.supporting = extract_pass(gateway, claim, usable, "supporting");
  bundle.opposing = extract_pass(gateway, claim, usable, "opposing");
  return bundle;
}

FactualityJudgment judge_factuality(Gateway& gateway, const Claim& claim, const EvidenceBundle& bundle, Date today) {
  if (bundle.empty()) return {FactualityLabel::Unverifiable, "no evidence retrieved"};
  std::ostringstream ev;
  ev << "### SUPPORTING\n";
  for (const auto& p : bundle.supporting) ev << "- (" << p.url << ") " << p.text << "\n";
  ev << "### OPPOSING\n";
  for (const auto& p : bundle.opposing) ev << "- (" << p.url << ") " << p.text << "\n";
  auto req = request(
      "Decide whether the evidence supports the claim. Supported: the evidence confirms it. PartiallySupported: "
      "the core holds but details differ or are missing. Contradicted: credible evidence refutes it. "
      "Unverifiable: the evidence is insufficient, indirect or too weak. Weigh recency against today's date.",
      "### CLAIM\n" + claim.text + "\n### TODAY\n" + format_iso_date(today) + "\n" + ev.str(),
      {{"title", "factuality_verdict"},
       {"type", "object"},
       {"required", {"label", "rationale"}},
       {"properties",
        {{"label", label_enum({"Supported", "PartiallySupported", "Contradicted", "Unverifiable"})},
         {"rationale", str()}}}});
  const auto reply = gateway.complete_structured(req).payload;
  return {*parse_factuality_label(reply.at("label").get<std::string>()), reply.at("rationale").get<std::string>()};
}

FactualityRecord verify_claim(Gateway& gateway, EvidenceTools& evidence, const Claim& claim,
                              const WorkflowOptions& options) {
  FactualityRecord rec;
  rec.claim = claim;
  try {
    const auto queries = neutralize_queries(gateway, rec.claim, options.today, options.queries_per_claim);
    std::vector<SearchResult> results;
    for (auto q : queries) {
      rec.queries.push_back(q.text);
      q.max_results = options.results_per_query;
      auto found = evidence.search(q);
      results.insert(results.end(), found.begin(), found.end());
    }
    results = dedupe(std::move(results));
    const auto tokens = text::content_tokens(rec.claim.text);
    const std::set<std::string> claim_tokens(tokens.begin(), tokens.end());
    std::stable_sort(results.begin(), results.end(), [&](const auto& a, const auto& b) {
      return overlap(claim_tokens, a.title + " " + a.snippet) > overlap(claim_tokens, b.title + " " + b.snippet);
    });
    if (results.size() > options.fetches_per_claim) results.resize(options.fetches_per_claim);
    std::vector<FetchedDocument> docs;
    for (const auto& r : results) {
      docs.push_back(evidence.fetch(r.url));
      rec.evidence_urls.push_back(normalized_or_raw(r.url));
    }
    rec.evidence = dual_stream_extract(gateway, rec.claim, docs);
    rec.judgment = judge_factuality(gateway, rec.claim, rec.evidence, options.today);
  } catch (const Error& e) {
    rec.judgment = {FactualityLabel::Unverifiable, "verification failed"};
    rec.diagnostic = e.what();
  }
  return rec;
}

FactualityRun run_factuality(Gateway& gateway, EvidenceTools& evidence, const Report& report,
                             const WorkflowOptions& options) {
  FactualityRun run;
  const auto claims = extract_key_claims(gateway, report, options.today, options.max_claims);
  auto records = parallel_map(claims.size(), options.workers,
                              [&](std::size_t i) { return verify_claim(gateway, evidence, claims[i], options); });
  for (auto& rec : records) {
    run.counts.add(rec.judgment.label);
    if (rec.diagnostic) run.diagnostics.push_back("claim \"" + rec.claim.text + "\": " + *rec.diagnostic);
    run.records.push_back(std::move(rec));
  }
  return run;
}

std::vector<Claim> extract_verifiable_claims(Gateway& gateway, const Report& report) {
  if (!has_prose(report)) return {};
  auto req = request(
      "Split the report into atomic claims and classify each. factual: a specific statement that outside sources "
      "can confirm or refute. meta: talk about the report itself (\"The following section discusses X.\"). "
      "subjective: opinion, evaluation or speculation. common_knowledge: widely known facts that need no source. "
      "Give the index of the sentence each claim comes from.",
      "### QUERY\n" + report.query + "\n### SENTENCES\n" + numbered_sentences(report),
      {{"title", "verifiable_claims"},
       {"type", "object"},
       {"required", {"claims"}},
       {"properties",
        {{"claims",
          {{"type", "array"},
           {"items",
            {{"type", "object"},
             {"required", {"sentence_index", "claim", "category"}},
             {"properties",
              {{"sentence_index", index_schema()},
               {"claim", nonempty_str()},
               {"category", label_enum({"factual", "meta", "subjective", "common_knowledge"})}}}}}}}}}});
  std::vector<Claim> claims;
  const auto reply = gateway.complete_structured(req);
  for (const auto& c : reply.payload.at("claims")) {
    const auto idx = c.at("sentence_index").get<std::size_t>();
    if (idx >= report.sentences.size()) continue;
    Claim claim;
    claim.text = c.at("claim").get<std::string>();
    claim.sentence_index = idx;
    claim.source_span = report.sentences[idx].span;
    claim.category = c.at("category").get<std::string>();
    claim.verifiable = claim.category == "factual";
    claims.push_back(std::move(claim));
  }
  std::map<std::size_t, std::vector<std::size_t>> by_sentence;  // sentence -> verifiable claim indices
  for (std::size_t i = 0; i < claims.size(); ++i) {
    if (claims[i].verifiable) by_sentence[*claims[i].sentence_index].push_back(i);
  }
  for (const auto& link : report.citations) {
    if (!link.sentence) continue;
    auto it = by_sentence.find(*link.sentence);
    if (it == by_sentence.end() && *link.sentence > 0) it = by_sentence.find(*link.sentence - 1);
    if (it == by_sentence.end()) continue;
    const auto url = normalized_or_raw(link.url);
    for (auto ci : it->second) {
      auto& urls = claims[ci].cited_urls;
      if (std::find(urls.begin(), urls.end(), url) == urls.end()) urls.push_back(url);
    }
  }
  return claims;
}

SourceJudgment judge_citation_faithfulness(Gateway& gateway, const Claim& claim, const FetchedDocument& source) {
  SourceJudgment out{source.url, source.status, FaithfulnessLabel::Unverifiable, ""};
  if (source.status != FetchStatus::Ok) {
    out.rationale = "source not accessible: " + std::string(to_string(source.status));
    return out;
  }
  const auto& body = source.content_text;
  auto req = request(
      "Compare the claim against the cited source text. Supported: the source states it. PartiallySupported: the "
      "source backs part of it. Neutral: the source is related but neither supports nor contradicts it, or is off "
      "topic. Contradicted: the source says otherwise. Unverifiable: the source text is unusable.",
      "### CLAIM\n" + claim.text + "\n### SOURCE\n" + source.url + "\n<<<\n" +
          (body.size() > kDocChars ? body.substr(0, kDocChars) : body) + "\n>>>\n",
      {{"title", "citation_faithfulness"},
       {"type", "object"},
       {"required", {"label", "rationale"}},
       {"properties",
        {{"label", label_enum({"Supported", "PartiallySupported", "Neutral", "Contradicted", "Unverifiable"})},
         {"rationale", str()}}}});
  const auto reply = gateway.complete_structured(req).payload;
  out.label = *parse_faithfulness_label(reply.at("label").get<std::string>());
  out.rationale = reply.at("rationale").get<std::string>();
  return out;
}

FaithfulnessLabel best_label(const std::vector<SourceJudgment>& sources) {
  auto best = FaithfulnessLabel::Unverifiable;
  for (const auto& s : sources) {
    if (faithfulness_rank(s.label) > faithfulness_rank(best)) best = s.label;
  }
  return best;
}

CiRun run_ci(Gateway& gateway, EvidenceTools& evidence, const Report& report, const WorkflowOptions& options) {
  CiRun run;
  std::vector<Claim> verifiable;
  for (auto& c : extract_verifiable_claims(gateway, report)) {
    (c.verifiable ? verifiable : run.excluded).push_back(std::move(c));
  }
  auto records = parallel_map(verifiable.size(), options.workers, [&](std::size_t i) {
    CitationRecord rec;
    rec.claim = verifiable[i];
    if (rec.claim.cited_urls.empty()) return rec;
    try {
      for (const auto& url : rec.claim.cited_urls) {
        rec.sources.push_back(judge_citation_faithfulness(gateway, rec.claim, evidence.fetch(url)));
      }
      rec.label = best_label(rec.sources);
    } catch (const Error& e) {
      rec.label = FaithfulnessLabel::Unverifiable;
      rec.diagnostic = e.what();
    }
    return rec;
  });
  run.n_total = static_cast<std::int64_t>(records.size());
  for (auto& rec : records) {
    if (!rec.claim.cited_urls.empty()) {
      ++run.n_cited;
      run.cf_counts.add(rec.label);
    }
    if (rec.diagnostic) run.diagnostics.push_back("claim \"" + rec.claim.text + "\": " + *rec.diagnostic);
    run.records.push_back(std::move(rec));
  }
  if (run.n_total == 0) run.diagnostics.emplace_back(kNoVerifiableClaims);
  return run;
}

DaRun run_da(Gateway& gateway, const Report& report, const WorkflowOptions& options) {
  DaRun run;
  std::vector<DomainRecord> domains;
  std::map<std::string, std::size_t> index;
  for (const auto& link : report.citations) {
    bool fallback = false;
    RootDomain root;
    try {
      root = root_domain_or_host(link.url, &fallback);
    } catch (const Error& e) {
      run.diagnostics.push_back("citation " + link.url + " skipped: " + e.what());
      continue;
    }
    auto [it, inserted] = index.try_emplace(root.value, domains.size());
    if (inserted) {
      DomainRecord rec;
      rec.rating.domain = root;
      rec.host_fallback = fallback;
      domains.push_back(std::move(rec));
    }
    domains[it->second].urls.push_back(link.url);
  }
  auto records = parallel_map(domains.size(), options.workers, [&](std::size_t i) {
    auto rec = domains[i];
    if (rec.host_fallback) {
      rec.rating.score = 1;
      rec.rating.category = DomainCategory::Other;
      rec.rating.rationale = "host has no registrable domain";
      return rec;
    }
    std::ostringstream samples;
    for (const auto& u : rec.urls) samples << "- " << u << "\n";
    auto req = request(
        "Rate the authority of the domain as a source for the query. Government and official bodies 9-10 "
        "(definitive), peer-reviewed and academic institutions 7-10, established news organisations 7-8 (high), "
        "specialist or trade sites 4-6 (moderate), commercial, social media, forums and personal blogs 1-3 (low). "
        "Give an integer score from 1 to 10 and a category.",
        "### QUERY\n" + report.query + "\n### DOMAIN\n" + rec.rating.domain.value + "\n### CITED URLS\n" + samples.str(),
        {{"title", "domain_authority"},
         {"type", "object"},
         {"required", {"category", "score", "rationale"}},
         {"properties",
          {{"category", label_enum({"Government", "Academic", "News", "Commercial", "Other"})},
           {"score", {{"type", "integer"}, {"minimum", 1}, {"maximum", 10}}},
           {"rationale", str()}}}});
    try {
      const auto reply = gateway.complete_structured(req).payload;
      rec.rating.category = *parse_domain_category(reply.at("category").get<std::string>());
      rec.rating.score = reply.at("score").get<int>();
      rec.rating.rationale = reply.at("rationale").get<std::string>();
    } catch (const Error& e) {
      rec.rating.score = 1;
      rec.rating.category = DomainCategory::Other;
      rec.diagnostic = e.what();
    }
    return rec;
  });
  for (auto& rec : records) {
    run.ratings.push_back(rec.rating);
    if (rec.diagnostic) run.diagnostics.push_back("domain " + rec.rating.domain.value + ": " + *rec.diagnostic);
    run.records.push_back(std::move(rec));
  }
  return run;
}

json to_json(const Claim& c) {
  json j{{"text", c.text},
         {"span", {c.source_span.begin, c.source_span.end}},
         {"cited_urls", c.cited_urls},
         {"verifiable", c.verifiable},
         {"category", c.category}};
  if (c.sentence_index) j["sentence_index"] = *c.sentence_index;
  return j;
}

json to_json(const FactualityRecord& r) {
  auto passages = [](const std::vector<Passage>& ps) {
    json arr = json::array();
    for (const auto& p : ps) arr.push_back({{"url", p.url}, {"text", p.text}});
    return arr;
  };
  json j{{"kind", "factuality"},
         {"claim", to_json(r.claim)},
         {"queries", r.queries},
         {"evidence_urls", r.evidence_urls},
         {"supporting", passages(r.evidence.supporting)},
         {"opposing", passages(r.evidence.opposing)},
         {"label", to_string(r.judgment.label)},
         {"rationale", r.judgment.rationale}};
  if (r.diagnostic) j["diagnostic"] = *r.diagnostic;
  return j;
}

json to_json(const CitationRecord& r) {
  json sources = json::array();
  for (const auto& s : r.sources) {
    sources.push_back(
        {{"url", s.url}, {"status", to_string(s.status)}, {"label", to_string(s.label)}, {"rationale", s.rationale}});
  }
  json j{{"kind", "citation"}, {"claim", to_json(r.claim)}, {"sources", sources}};
  if (!r.claim.cited_urls.empty()) j["label"] = to_string(r.label);
  if (r.diagnostic) j["diagnostic"] = *r.diagnostic;
  return j;
}

json to_json(const DomainRecord& r) {
  json j{{"kind", "domain"},
         {"domain", r.rating.domain.value},
         {"category", to_string(r.rating.category)},
         {"score", r.rating.score},
         {"rationale", r.rating.rationale},
         {"urls", r.urls},
         {"host_fallback", r.host_fallback}};
  if (r.diagnostic) j["diagnostic"] = *r.diagnostic;
  return j;
}

void write_jsonl(const std::filesystem::path& file, const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) out += r.dump() + "\n";
  write_file_atomic(file, out);
}

}  // namespace dreval
