#include "scripted_judge.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <vector>

#include "dreval/error.hpp"
#include "dreval/text.hpp"

namespace dreval::scripted {
namespace {

using Sections = std::map<std::string, std::string>;

// "### NAME" headers outside <<< >>> blocks.
Sections parse_sections(const std::string& prompt) {
  Sections out;
  std::istringstream in(prompt);
  std::string line, current;
  bool in_block = false;
  while (std::getline(in, line)) {
    if (!in_block && line.rfind("### ", 0) == 0) {
      current = line.substr(4);
      out[current];
      continue;
    }
    if (line == "<<<") in_block = true;
    if (line == ">>>") in_block = false;
    if (!current.empty()) out[current] += line + "\n";
  }
  for (auto& [k, v] : out) {
    while (!v.empty() && v.back() == '\n') v.pop_back();
  }
  return out;
}

std::string section(const Sections& s, const std::string& name) {
  auto it = s.find(name);
  return it == s.end() ? std::string() : it->second;
}

// Content between the first "<<<" line and the matching ">>>" line.
std::string block_body(const std::string& s) {
  const auto open = s.find("<<<\n");
  if (open == std::string::npos) return s;
  const auto close = s.rfind("\n>>>");
  if (close == std::string::npos || close < open + 4) return s.substr(open + 4);
  return s.substr(open + 4, close - open - 4);
}

struct Block {
  std::string header;  // e.g. "[doc 0] https://..." or "[step 2] url_fetch: https://..."
  std::string body;
};

std::vector<Block> parse_blocks(const std::string& s) {
  std::vector<Block> out;
  std::istringstream in(s);
  std::string line, last_header;
  bool in_block = false;
  std::string body;
  while (std::getline(in, line)) {
    if (!in_block) {
      if (line == "<<<") {
        in_block = true;
        body.clear();
      } else if (!line.empty()) {
        last_header = line;
      }
      continue;
    }
    if (line == ">>>") {
      if (!body.empty() && body.back() == '\n') body.pop_back();
      out.push_back({last_header, body});
      in_block = false;
      continue;
    }
    body += line + "\n";
  }
  return out;
}

// Verbatim sentence substrings of `text`.
std::vector<std::string> sentences_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto piece = std::string(text::trim(std::string_view(text).substr(start, end - start)));
    if (!piece.empty()) out.push_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      emit(i);
      start = i + 1;
      continue;
    }
    if ((c == '.' || c == '!' || c == '?') && i + 2 < text.size() && text[i + 1] == ' ') {
      const unsigned char next = static_cast<unsigned char>(text[i + 2]);
      if (std::isupper(next) || std::isdigit(next) || next == '"') emit(i + 1);
    }
  }
  emit(text.size());
  return out;
}

std::set<std::string> token_set(std::string_view s) {
  const auto toks = text::content_tokens(s);
  return {toks.begin(), toks.end()};
}

// Fraction of `claim` content tokens present in `other`.
double coverage(const std::set<std::string>& claim, const std::set<std::string>& other) {
  if (claim.empty()) return 0;
  std::size_t hit = 0;
  for (const auto& t : claim) hit += other.count(t);
  return static_cast<double>(hit) / static_cast<double>(claim.size());
}

bool has_any(std::string_view haystack, std::initializer_list<std::string_view> needles) {
  const auto lower = text::to_lower(haystack);
  for (auto n : needles) {
    if (lower.find(n) != std::string::npos) return true;
  }
  return false;
}

bool has_word(std::string_view haystack, std::initializer_list<std::string_view> words) {
  const auto toks = text::word_tokens(haystack);
  for (auto w : words) {
    if (std::find(toks.begin(), toks.end(), w) != toks.end()) return true;
  }
  return false;
}

bool negates(std::string_view s) {
  return has_word(s, {"not", "no", "never", "false", "incorrect", "myth", "debunked", "refuted", "denied", "untrue",
                      "wrong", "misleading", "outdated", "contrary"}) ||
         has_any(s, {"no longer", "n't ", "there is no evidence"});
}

bool numbers_conflict(std::string_view claim, std::string_view other) {
  const auto a = text::numeric_tokens(claim);
  const auto b = text::numeric_tokens(other);
  if (a.empty() || b.empty()) return false;
  return std::none_of(a.begin(), a.end(), [&](const auto& t) { return std::find(b.begin(), b.end(), t) != b.end(); });
}

bool numbers_present(std::string_view claim, std::string_view other) {
  const auto a = text::numeric_tokens(claim);
  const auto b = text::numeric_tokens(other);
  return std::all_of(a.begin(), a.end(), [&](const auto& t) { return std::find(b.begin(), b.end(), t) != b.end(); });
}

std::string strip_markup(std::string s) {
  static const std::regex inline_link(R"(!?\[([^\]]*)\]\([^)]*\))");
  static const std::regex ref_link(R"(\[([^\]]*)\]\[[^\]]*\])");
  static const std::regex bare(R"(<?https?://[^\s>)]+>?)");
  s = std::regex_replace(s, inline_link, "$1");
  s = std::regex_replace(s, ref_link, "$1");
  s = std::regex_replace(s, bare, "");
  s = text::squash_whitespace(s);
  while (!s.empty() && (s.back() == ' ' || s.back() == '(')) s.pop_back();
  for (const std::string bad : {" .", " ,", "()", "( )"}) {
    for (auto p = s.find(bad); p != std::string::npos; p = s.find(bad)) s.erase(p, bad == " ." || bad == " ," ? 1 : bad.size());
  }
  return text::squash_whitespace(s);
}

// "[i] text" lines.
std::vector<std::pair<std::size_t, std::string>> numbered(const std::string& s) {
  std::vector<std::pair<std::size_t, std::string>> out;
  static const std::regex line_re(R"(^\[(\d+)\] (.*)$)");
  std::istringstream in(s);
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_match(line, m, line_re)) out.emplace_back(std::stoul(m[1].str()), m[2].str());
  }
  return out;
}

bool is_meta(std::string_view s) {
  const auto t = text::trim(s);
  for (auto p : {"the following section", "this section", "this report", "in this report", "below we", "below, we",
                 "we will", "in summary", "in conclusion", "as discussed", "the next section", "this article"}) {
    if (text::starts_with_icase(t, p)) return true;
  }
  return false;
}

bool is_subjective(std::string_view s) {
  return has_any(s, {"arguably", "in my view", "i think", "i believe", "we believe", "it seems", "remarkabl",
                     "fascinating", "impressive", "beautiful", "exciting", "elegant", "admirabl"});
}

bool is_common_knowledge(std::string_view s) {
  return has_any(s, {"water boils at", "earth orbits the sun", "sun rises in the east", "seven days in a week",
                     "water freezes at"});
}

bool fact_like(std::string_view s) {
  const auto words = text::word_tokens(s);
  if (words.size() < 5 || words.size() > 60) return false;
  if (text::trim(s).ends_with("?") || is_meta(s) || is_subjective(s)) return false;
  return true;
}

// Lowercases a sentence-initial capital unless the first word is a proper
// noun with inner capitals ("TikTok") or an acronym.
std::string lower_first(std::string s) {
  const auto word_end = std::min(s.find(' '), s.size());
  const auto inner_caps = std::any_of(s.begin() + 1, s.begin() + static_cast<std::ptrdiff_t>(word_end),
                                      [](unsigned char c) { return std::isupper(c); });
  if (s.size() > 1 && std::isupper(static_cast<unsigned char>(s[0])) && !inner_caps) {
    s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  }
  return s;
}

std::pair<int, int> limits(const Sections& s) {
  static const std::regex re(R"(between (\d+) and (\d+))");
  std::smatch m;
  const auto l = section(s, "LIMITS");
  if (std::regex_search(l, m, re)) return {std::stoi(m[1].str()), std::stoi(m[2].str())};
  return {1, 100};
}

std::set<std::string> listed_tools(const Sections& s) {
  std::set<std::string> out;
  std::istringstream in(section(s, "TOOLS"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("- ", 0) != 0) continue;
    auto name = line.substr(2);
    name = name.substr(0, name.find(':'));
    out.insert(std::string(text::trim(name)));
  }
  return out;
}

struct Step {
  std::string tool;
  std::string input;
  std::string observation;
};

std::vector<Step> transcript_steps(const std::string& transcript) {
  std::vector<Step> out;
  static const std::regex head(R"(^\[step \d+\] ([a-z_]+)(?:: (.*))?$)");
  for (const auto& b : parse_blocks(transcript)) {
    std::smatch m;
    if (!std::regex_match(b.header, m, head)) continue;
    out.push_back({m[1].str(), m[2].matched ? m[2].str() : "", b.body});
  }
  return out;
}

std::vector<std::string> result_urls(const std::string& observation) {
  std::vector<std::string> out;
  static const std::regex re(R"(^\d+\. (\S+) \|)");
  std::istringstream in(observation);
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_search(line, m, re)) out.push_back(m[1].str());
  }
  return out;
}

struct Research {
  std::vector<std::string> candidates;                      // search results, first seen order
  std::vector<std::pair<std::string, std::string>> pages;   // fetched url -> text
  std::set<std::string> fetched;
  int searches = 0;
  int rejections = 0;
};

Research research_state(const std::vector<Step>& steps) {
  Research r;
  for (const auto& s : steps) {
    if (s.tool == "rejected") {
      ++r.rejections;
    } else if (s.tool == "url_fetch") {
      r.fetched.insert(s.input);
      if (s.observation.rfind("fetch failed", 0) != 0 && s.observation.rfind("tool error", 0) != 0) {
        r.pages.emplace_back(s.input, s.observation);
      }
    } else {
      ++r.searches;
      for (const auto& u : result_urls(s.observation)) {
        if (std::find(r.candidates.begin(), r.candidates.end(), u) == r.candidates.end()) r.candidates.push_back(u);
      }
    }
  }
  return r;
}

json tool_action(const std::string& tool, const std::string& input, const std::string& thought) {
  return {{"thought", thought}, {"action", tool}, {"input", input}};
}

// Search, then read results until `reads` pages are in hand. Returns nullopt
// when research is complete.
std::optional<json> next_research_step(const Research& r, const std::string& query, std::size_t reads) {
  if (r.searches == 0) return tool_action("web_search", query, "Search for current sources on the query.");
  if (r.pages.size() < reads + static_cast<std::size_t>(r.rejections) * 2) {
    for (const auto& u : r.candidates) {
      if (!r.fetched.contains(u)) return tool_action("url_fetch", u, "Read the next most relevant result.");
    }
    if (r.searches < 2) return tool_action("web_search", query + " latest", "Look for more sources.");
  }
  return std::nullopt;
}

// ---- request handlers -----------------------------------------------------

json tool_selection(const Sections& s) {
  const auto q = section(s, "QUERY");
  json tools = json::array({"web_search", "url_fetch"});
  if (has_any(q, {"repo", "github", "open-source", "open source", "codebase", "library", "libraries", "framework"})) {
    tools.push_back("github");
  }
  if (has_any(q, {"paper", "arxiv", "preprint", "academic literature", "peer-reviewed"})) tools.push_back("arxiv");
  return {{"tools", tools}, {"rationale", "Chosen from the topical cues in the query."}};
}

json kic_step(const Sections& s) {
  const auto query = section(s, "QUERY");
  const auto [lo, hi] = limits(s);
  const auto state = research_state(transcript_steps(section(s, "TRANSCRIPT")));
  if (auto step = next_research_step(state, query, 4)) return *step;
  json items = json::array();
  std::set<std::string> seen;
  // Dated or quantified facts first, then other factual sentences if the
  // checklist would otherwise fall short.
  for (const bool want_specific : {true, false}) {
    if (!want_specific && static_cast<int>(items.size()) >= lo) break;
    for (const auto& [url, page] : state.pages) {
      for (const auto& sent : sentences_of(page)) {
        if (static_cast<int>(items.size()) >= hi) break;
        const bool specific = !text::numeric_tokens(sent).empty();
        if (!fact_like(sent) || specific != want_specific || !seen.insert(sent).second) continue;
        auto body = sent;
        for (const std::string lead : {"However, ", "But ", "Meanwhile, "}) {
          if (body.rfind(lead, 0) == 0) body = body.substr(lead.size());
        }
        while (!body.empty() && (body.back() == '.' || body.back() == ' ')) body.pop_back();
        items.push_back({{"question", "Does the report state that " + lower_first(body) + "?"},
                         {"grounding", json::array({{{"url", url}, {"snippet", sent}}})}});
      }
    }
  }
  return {{"thought", "Draft the checklist from the dated facts gathered."},
          {"action", "finish"},
          {"result", {{"items", items}}}};
}

json rq_step(const Sections& s) {
  const auto query = section(s, "QUERY");
  const auto [lo, hi] = limits(s);
  const auto tools = listed_tools(s);
  const auto state = research_state(transcript_steps(section(s, "TRANSCRIPT")));
  if (auto step = next_research_step(state, query, 2)) return *step;

  std::vector<std::string> verify_tools{"web_search", "url_fetch"};
  std::string extra;
  if (tools.contains("github")) {
    verify_tools.push_back("github");
    extra = " and github to inspect the repositories' code and documentation";
  }
  if (tools.contains("arxiv")) {
    verify_tools.push_back("arxiv");
    extra += " and arxiv for peer-reviewed studies";
  }
  const std::string verify = "Use web_search and url_fetch to find independent sources on each step" + extra + ".";
  struct Template {
    std::string question, extract, compare;
  };
  const std::vector<Template> templates{
      {"How well does the report justify the main causal or explanatory claims it makes about: " + query + "?",
       "List every causal or explanatory chain the report asserts, with the evidence it offers for each link.",
       "Deduct for links asserted without evidence, for conclusions that restate their premises, and for "
       "chains the external sources contradict."},
      {"Does the report weigh alternative explanations and counter-evidence relevant to: " + query + "?",
       "Collect the alternative explanations, confounders and counter-arguments the report mentions.",
       "Deduct when the external sources raise confounders or counter-evidence the report ignores."},
      {"Are the report's conclusions on " + query + " proportionate to the evidence it presents?",
       "Extract the report's final conclusions and the specific evidence each one rests on.",
       "Deduct for conclusions stronger than the evidence, and for small gaps between evidence and claim."},
      {"Does the report keep its comparisons and quantities consistent across sections?",
       "Extract every comparison and quantity the report states, noting where each appears.",
       "Deduct for inconsistencies between sections or with the external sources."},
  };
  json items = json::array();
  const int count = std::clamp(lo, 1, std::min<int>(hi, static_cast<int>(templates.size())));
  for (int i = 0; i < count && !state.pages.empty(); ++i) {
    const auto& [url, page] = state.pages[static_cast<std::size_t>(i) % state.pages.size()];
    const auto sents = sentences_of(page);
    items.push_back({{"question", templates[i].question},
                     {"plan",
                      {{"extract_step", templates[i].extract},
                       {"verify_step", verify},
                       {"compare_step", templates[i].compare},
                       {"verify_tools", verify_tools}}},
                     {"grounding", json::array({{{"url", url}, {"snippet", sents.empty() ? "" : sents.front()}}})}});
  }
  return {{"thought", "Write plans around the report's likely reasoning."},
          {"action", "finish"},
          {"result", {{"items", items}}}};
}

json key_claims(const Sections& s) {
  json claims = json::array();
  for (const auto& [idx, sent] : numbered(section(s, "SENTENCES"))) {
    if (!fact_like(sent) || is_common_knowledge(sent)) continue;
    const auto clean = strip_markup(sent);
    if (text::word_tokens(clean).size() < 5) continue;
    claims.push_back({{"sentence_index", idx}, {"claim", clean}});
  }
  return {{"claims", claims}};
}

json neutral_queries(const Sections& s) {
  const auto claim = section(s, "CLAIM");
  static const std::set<std::string> predicates{
      "dropped", "drop",    "fell",   "fall",     "rose",    "rise",     "increased", "increase", "decreased",
      "decrease", "declined", "grew",  "reached",  "surged",  "plunged",  "jumped",    "climbed",  "hit",
      "cut",     "raised",  "lowered", "doubled", "halved",  "soared",   "slumped",   "remains",  "remained"};
  std::vector<std::string> topic;
  for (const auto& t : text::content_tokens(claim)) {
    if (predicates.contains(t) || !text::numeric_tokens(t).empty()) continue;
    if (std::find(topic.begin(), topic.end(), t) == topic.end()) topic.push_back(t);
  }
  auto join = [&](std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < std::min(n, topic.size()); ++i) out += (out.empty() ? "" : " ") + topic[i];
    return out;
  };
  const bool rate = claim.find('%') != std::string::npos || has_word(claim, {"rate", "percent"});
  json queries = json::array();
  if (topic.empty()) return {{"queries", {"latest reliable data", "official statistics"}}};
  queries.push_back("current " + join(2) + (rate && !has_word(join(2), {"rate"}) ? " rate" : ""));
  queries.push_back(join(6));
  queries.push_back(join(3) + " latest data");
  return {{"queries", queries}};
}

struct DocSentence {
  std::size_t doc;
  std::string text;
  double cover;
};

std::vector<DocSentence> relevant_sentences(const Sections& s) {
  const auto claim_tokens = token_set(section(s, "CLAIM"));
  std::vector<DocSentence> out;
  const auto docs = parse_blocks(section(s, "DOCUMENTS"));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& sent : sentences_of(docs[d].body)) {
      const double c = coverage(claim_tokens, token_set(sent));
      if (c >= 0.4 && text::content_tokens(sent).size() >= 3) out.push_back({d, sent, c});
    }
  }
  return out;
}

json evidence_pass(const Sections& s, bool supporting) {
  const auto claim = section(s, "CLAIM");
  json passages = json::array();
  for (const auto& ds : relevant_sentences(s)) {
    const bool opposes = negates(ds.text) != negates(claim) || numbers_conflict(claim, ds.text);
    if (opposes != supporting) passages.push_back({{"doc", ds.doc}, {"quote", ds.text}});
  }
  return {{"passages", passages}};
}

std::vector<std::string> listed_passages(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("- (", 0) != 0) continue;
    const auto close = line.find(") ");
    out.push_back(close == std::string::npos ? line : line.substr(close + 2));
  }
  return out;
}

json factuality_verdict(const Sections& s) {
  const auto claim = section(s, "CLAIM");
  const auto sup = listed_passages(section(s, "SUPPORTING"));
  const auto opp = listed_passages(section(s, "OPPOSING"));
  std::string label;
  std::string why;
  if (sup.empty() && opp.empty()) {
    label = "Unverifiable";
    why = "No usable evidence.";
  } else if (sup.empty() || opp.size() > sup.size()) {
    label = "Contradicted";
    why = "The retrieved evidence states otherwise.";
  } else if (!opp.empty()) {
    label = "PartiallySupported";
    why = "Evidence is mixed.";
  } else {
    const bool exact = std::any_of(sup.begin(), sup.end(), [&](const auto& p) { return numbers_present(claim, p); });
    label = exact ? "Supported" : "PartiallySupported";
    why = exact ? "The evidence confirms the claim." : "The evidence backs the claim but not its figures.";
  }
  return {{"label", label}, {"rationale", why}};
}

json verifiable_claims(const Sections& s) {
  json claims = json::array();
  for (const auto& [idx, sent] : numbered(section(s, "SENTENCES"))) {
    const auto clean = strip_markup(sent);
    if (text::word_tokens(clean).size() < 3) continue;
    std::string category = "factual";
    if (is_meta(clean)) {
      category = "meta";
    } else if (is_common_knowledge(clean)) {
      category = "common_knowledge";
    } else if (is_subjective(clean) || text::trim(clean).ends_with("?")) {
      category = "subjective";
    }
    claims.push_back({{"sentence_index", idx}, {"claim", clean}, {"category", category}});
  }
  return {{"claims", claims}};
}

json citation_faithfulness(const Sections& s) {
  const auto claim = section(s, "CLAIM");
  const auto source = block_body(section(s, "SOURCE"));
  const auto claim_tokens = token_set(claim);
  double best = 0;
  std::string best_sentence;
  for (const auto& sent : sentences_of(source)) {
    const double c = coverage(claim_tokens, token_set(sent));
    if (c > best) {
      best = c;
      best_sentence = sent;
    }
  }
  std::string label = "Neutral";
  if (best >= 0.6) {
    if (negates(best_sentence) != negates(claim) || numbers_conflict(claim, best_sentence)) {
      label = "Contradicted";
    } else {
      label = numbers_present(claim, best_sentence) ? "Supported" : "PartiallySupported";
    }
  } else if (best >= 0.35) {
    label = "PartiallySupported";
  }
  return {{"label", label}, {"rationale", best_sentence.empty() ? "Source does not address the claim." : best_sentence}};
}

json domain_authority(const Sections& s) {
  const auto d = text::to_lower(text::trim(section(s, "DOMAIN")));
  auto ends = [&](std::string_view suffix) { return d == suffix.substr(1) || d.ends_with(suffix); };
  auto in = [&](std::initializer_list<std::string_view> names) {
    return std::any_of(names.begin(), names.end(), [&](auto n) { return d == n; });
  };
  std::string category = "Commercial";
  int score = 4;
  if (ends(".gov") || ends(".mil") || d.find(".gov.") != std::string::npos || ends(".int") ||
      in({"europa.eu", "congress.gov", "supremecourt.gov"})) {
    category = "Government";
    score = 10;
  } else if (ends(".edu") || d.find(".ac.") != std::string::npos ||
             in({"nature.com", "science.org", "arxiv.org", "thelancet.com", "nejm.org", "springer.com", "acm.org",
                 "ieee.org", "pnas.org"})) {
    category = "Academic";
    score = 9;
  } else if (in({"reuters.com", "apnews.com", "bbc.co.uk", "bbc.com", "nytimes.com", "ft.com", "wsj.com",
                 "theguardian.com", "npr.org", "bloomberg.com", "cnbc.com", "cnn.com", "washingtonpost.com",
                 "economist.com", "politico.com", "axios.com"})) {
    category = "News";
    score = 8;
  } else if (in({"twitter.com", "x.com", "facebook.com", "reddit.com", "tiktok.com", "medium.com", "quora.com",
                 "youtube.com", "instagram.com", "blogspot.com", "wordpress.com", "substack.com", "pinterest.com"})) {
    category = "Other";
    score = 2;
  } else if (in({"wikipedia.org", "britannica.com"})) {
    category = "Other";
    score = 6;
  } else if (in({"github.com", "gitlab.com", "readthedocs.io", "stackoverflow.com"})) {
    category = "Commercial";
    score = 5;
  }
  return {{"category", category}, {"score", score}, {"rationale", "Rated from the domain's publisher type."}};
}

struct ReportFeatures {
  std::size_t words = 0, sentences = 0, headings = 0, bullets = 0, paragraphs = 0, links = 0, transitions = 0,
              numbers = 0;
  double mean_len = 0, sd_len = 0;
};

ReportFeatures features(const std::string& report) {
  ReportFeatures f;
  std::istringstream in(report);
  std::string line;
  bool blank = true;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty()) {
      blank = true;
      continue;
    }
    if (t.starts_with("#")) ++f.headings;
    else if (t.starts_with("- ") || t.starts_with("* ")) ++f.bullets;
    else if (blank) ++f.paragraphs;
    blank = false;
  }
  std::vector<double> lens;
  for (const auto& s : sentences_of(report)) {
    if (text::trim(s).starts_with("#")) continue;
    const auto n = text::word_tokens(s).size();
    if (n >= 3) lens.push_back(static_cast<double>(n));
  }
  f.sentences = lens.size();
  for (double l : lens) f.mean_len += l;
  if (!lens.empty()) f.mean_len /= static_cast<double>(lens.size());
  for (double l : lens) f.sd_len += (l - f.mean_len) * (l - f.mean_len);
  if (lens.size() > 1) f.sd_len = std::sqrt(f.sd_len / static_cast<double>(lens.size() - 1));
  f.words = text::word_tokens(report).size();
  f.numbers = text::numeric_tokens(report).size();
  for (std::size_t p = report.find("http"); p != std::string::npos; p = report.find("http", p + 4)) ++f.links;
  const auto toks = text::word_tokens(report);
  for (const auto& t : toks) {
    static const std::set<std::string> tr{"however", "therefore", "moreover", "because", "consequently", "meanwhile",
                                          "although", "furthermore", "thus", "finally", "first", "second", "instead",
                                          "while", "since"};
    f.transitions += tr.count(t);
  }
  return f;
}

double clamp100(double v) { return std::round(std::clamp(v, 0.0, 100.0)); }

json wq_dimension(const JudgeRequest& req, const Sections& s) {
  const auto title = req.output_schema.value("title", std::string());
  const auto f = features(block_body(section(s, "REPORT")));
  const double density = f.words == 0 ? 0 : static_cast<double>(f.numbers + f.links) / static_cast<double>(f.words);
  const double per_sentence = f.sentences == 0 ? 0 : static_cast<double>(f.transitions) / static_cast<double>(f.sentences);
  json out;
  if (title == "wq_ideas_content") {
    out["main_idea_clarity"] = clamp100(50 + (f.headings > 0 ? 15 : 0) + std::min<double>(20, f.paragraphs * 4));
    out["detail_relevance"] = clamp100(45 + 400 * density);
    out["information_density"] = clamp100(40 + 600 * density);
    out["conceptual_synthesis"] = clamp100(45 + 60 * per_sentence);
  } else if (title == "wq_organization") {
    out["heading_structure"] = clamp100(f.headings == 0 ? 35 : 60 + 8 * std::min<std::size_t>(f.headings, 4));
    out["bullet_grouping_logic"] = clamp100(f.bullets == 0 ? 60 : 70 + std::min<std::size_t>(f.bullets, 10));
    out["structural_coherence"] = clamp100(50 + 10 * std::min<std::size_t>(f.paragraphs, 3) + 30 * per_sentence);
  } else {
    const double cv = f.mean_len == 0 ? 0 : f.sd_len / f.mean_len;
    out["rhythm_variety"] = clamp100(40 + 120 * cv);
    out["transition_smoothness"] = clamp100(45 + 80 * per_sentence);
    out["readability_flow"] = clamp100(95 - 1.5 * std::abs(f.mean_len - 18));
  }
  out["rationale"] = "Scored from structure, density and sentence-level cues.";
  return out;
}

json kic_verdict(const Sections& s) {
  const auto raw = section(s, "QUESTION");
  const auto question = text::trim(raw);
  static const std::regex lead(R"(^(does|did|is|are|was|has|have) the report (state|mention|note|report|say) (that )?)",
                               std::regex::icase);
  std::string fact = std::regex_replace(std::string(question), lead, "");
  while (!fact.empty() && (fact.back() == '?' || fact.back() == ' ')) fact.pop_back();
  const auto report = block_body(section(s, "REPORT"));
  const double cover = coverage(token_set(fact), token_set(report));
  const bool numbers = numbers_present(fact, report);
  const bool yes = cover >= 0.7 && numbers;
  return {{"verdict", yes ? "yes" : "no"},
          {"justification", yes ? "The report states this fact." : "The report does not state this fact."}};
}

struct Fault {
  std::string fault;
  std::string reason;
};

std::vector<Fault> reasoning_faults(const std::string& report) {
  std::vector<Fault> faults;
  static const std::regex causal(
      R"(\b(causes?|caused|causing|leads? to|led to|drives?|driven by|results? in|because|due to|therefore|so that)\b)",
      std::regex::icase);
  int unsupported = 0;
  int circular = 0;
  for (const auto& sent : sentences_of(report)) {
    std::smatch m;
    if (!std::regex_search(sent, m, causal)) continue;
    const auto before = token_set(m.prefix().str());
    const auto after = token_set(m.suffix().str());
    if (circular == 0 && !before.empty() && !after.empty() && coverage(after, before) >= 0.6) {
      faults.push_back({"circular_argument", "The conclusion restates its premise: \"" + sent + "\""});
      ++circular;
      continue;
    }
    const bool evidenced = sent.find("http") != std::string::npos || !text::numeric_tokens(sent).empty() ||
                           has_any(sent, {"study", "studies", "data", "according to", "analysis", "survey", "trial"});
    if (!evidenced && unsupported < 2) {
      faults.push_back({"unsupported_causal_claim", "Causal link asserted without evidence: \"" + sent + "\""});
      ++unsupported;
    }
  }
  if (!has_any(report, {"however", "although", "on the other hand", "confound", "correlat", "counter", "limitation",
                        "critics", "alternative", "caveat"})) {
    faults.push_back({"ignored_counter_evidence", "No confounders or counter-evidence are considered."});
  }
  std::size_t links = 0;
  for (std::size_t p = report.find("http"); p != std::string::npos; p = report.find("http", p + 4)) ++links;
  if (links < 2) faults.push_back({"minor_gap", "Few sources are cited for the argument."});
  return faults;
}

json rq_result(const Sections& s) {
  json deductions = json::array();
  for (const auto& f : reasoning_faults(block_body(section(s, "REPORT")))) {
    deductions.push_back({{"fault", f.fault}, {"reason", f.reason}});
  }
  return {{"deductions", deductions}, {"summary", deductions.empty() ? "Reasoning holds up." : "Faults found."}};
}

json rq_eval_step(const Sections& s) {
  const auto state = research_state(transcript_steps(section(s, "TRANSCRIPT")));
  if (auto step = next_research_step(state, section(s, "QUESTION"), 1)) return *step;
  return {{"thought", "Compare the report's reasoning with the sources."}, {"action", "finish"}, {"result", rq_result(s)}};
}

class ScriptedJudge final : public CompletionBackend {
 public:
  std::string complete(const JudgeRequest& req) override { return scripted_reply(req).dump(); }
  std::string name() const override { return "scripted"; }
};

}  // namespace

json scripted_reply(const JudgeRequest& req) {
  const auto title = req.output_schema.value("title", std::string());
  const auto s = parse_sections(req.user_prompt);
  if (title == "tool_selection") return tool_selection(s);
  if (title == "kic_agent_step") return kic_step(s);
  if (title == "rq_agent_step") return rq_step(s);
  if (title == "key_claims") return key_claims(s);
  if (title == "neutral_queries") return neutral_queries(s);
  if (title == "evidence_supporting") return evidence_pass(s, true);
  if (title == "evidence_opposing") return evidence_pass(s, false);
  if (title == "factuality_verdict") return factuality_verdict(s);
  if (title == "verifiable_claims") return verifiable_claims(s);
  if (title == "citation_faithfulness") return citation_faithfulness(s);
  if (title == "domain_authority") return domain_authority(s);
  if (title.rfind("wq_", 0) == 0) return wq_dimension(req, s);
  if (title == "kic_verdict") return kic_verdict(s);
  if (title == "rq_eval_step") return rq_eval_step(s);
  if (title == "rq_final_score") return rq_result(s);
  throw Error(Errc::BackendUnavailable, "scripted judge has no rule for request \"" + title + "\"");
}

std::shared_ptr<CompletionBackend> make_scripted_judge() { return std::make_shared<ScriptedJudge>(); }

}  // namespace dreval::scripted
