#include "dreval/evidence.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <future>
#include <set>
#include <thread>

#include "dreval/error.hpp"
#include "dreval/io.hpp"
#include "dreval/text.hpp"
#include "dreval/url.hpp"

namespace dreval {

std::string_view to_string(FetchStatus s) noexcept {
  switch (s) {
    case FetchStatus::Ok: return "ok";
    case FetchStatus::Paywalled: return "paywalled";
    case FetchStatus::Blocked: return "blocked";
    case FetchStatus::NotFound: return "not_found";
    case FetchStatus::Timeout: return "timeout";
  }
  return "blocked";
}

std::vector<SearchResult> dedupe(std::vector<SearchResult> results) {
  std::set<std::string> seen;
  std::vector<SearchResult> out;
  out.reserve(results.size());
  for (auto& r : results) {
    std::string key;
    try {
      key = normalize_url(r.url);
    } catch (const Error&) {
      continue;
    }
    if (seen.insert(key).second) out.push_back(std::move(r));
  }
  return out;
}

std::vector<SearchResult> apply_cutoff(std::vector<SearchResult> results, Date cutoff) {
  std::erase_if(results, [&](const SearchResult& r) {
    return !r.published_date || std::chrono::sys_days{r.published_date->last_day()} > std::chrono::sys_days{cutoff};
  });
  return results;
}

json to_json(const SearchResult& r) {
  json j = {{"url", r.url}, {"title", r.title}, {"snippet", r.snippet}};
  j["published_date"] = r.published_date ? json(r.published_date->to_string()) : json(nullptr);
  return j;
}

SearchResult search_result_from_json(const json& j) {
  SearchResult r;
  r.url = j.at("url").get<std::string>();
  r.title = j.value("title", std::string());
  r.snippet = j.value("snippet", std::string());
  if (auto d = j.find("published_date"); d != j.end() && d->is_string()) {
    r.published_date = parse_partial_date(d->get<std::string>());
  }
  return r;
}

// ---------------------------------------------------------------------------
// HTML extraction

namespace {

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const auto name = s.substr(i + 1, semi - i - 1);
    std::string rep;
    if (name == "amp") rep = "&";
    else if (name == "lt") rep = "<";
    else if (name == "gt") rep = ">";
    else if (name == "quot") rep = "\"";
    else if (name == "apos" || name == "#39") rep = "'";
    else if (name == "nbsp") rep = " ";
    else if (name.starts_with('#')) {
      unsigned long cp = 0;
      try {
        cp = name.size() > 1 && (name[1] == 'x' || name[1] == 'X') ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                                                                     : std::stoul(std::string(name.substr(1)));
      } catch (...) {
        cp = 0;
      }
      if (cp > 0 && cp < 0x80) {
        rep = std::string(1, static_cast<char>(cp));
      } else if (cp >= 0x80 && cp < 0x800) {
        rep = {static_cast<char>(0xC0 | (cp >> 6)), static_cast<char>(0x80 | (cp & 0x3F))};
      } else if (cp >= 0x800 && cp < 0x10000) {
        rep = {static_cast<char>(0xE0 | (cp >> 12)), static_cast<char>(0x80 | ((cp >> 6) & 0x3F)),
               static_cast<char>(0x80 | (cp & 0x3F))};
      }
    }
    if (rep.empty()) {
      out.push_back('&');
      continue;
    }
    out += rep;
    i = semi;
  }
  return out;
}

std::string tag_name(std::string_view tag) {
  std::size_t i = 1;
  if (i < tag.size() && tag[i] == '/') ++i;
  std::size_t j = i;
  while (j < tag.size() && std::isalnum(static_cast<unsigned char>(tag[j]))) ++j;
  return text::to_lower(tag.substr(i, j - i));
}

// Returns [begin, end) of the first <name ...>...</name> region's inner text.
std::optional<std::pair<std::size_t, std::size_t>> find_element(const std::string& lower, std::string_view name) {
  const auto open = lower.find("<" + std::string(name));
  if (open == std::string::npos) return std::nullopt;
  const auto open_end = lower.find('>', open);
  const auto close = lower.find("</" + std::string(name), open_end);
  if (open_end == std::string::npos || close == std::string::npos) return std::nullopt;
  return std::make_pair(open_end + 1, close);
}

}  // namespace

std::string extract_main_text(std::string_view html) {
  static const std::set<std::string> kDropped = {"script", "style", "nav", "header", "footer", "aside",
                                                 "form", "noscript", "svg", "iframe", "template"};
  static const std::set<std::string> kBlock = {"p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5",
                                               "h6", "tr", "table", "section", "article", "main", "blockquote",
                                               "pre", "dd", "dt", "figcaption", "title", "body"};

  std::string source(html);
  const auto lower = text::to_lower(source);
  for (auto preferred : {"main", "article"}) {
    if (auto region = find_element(lower, preferred)) {
      source = source.substr(region->first, region->second - region->first);
      break;
    }
  }

  std::string out;
  std::size_t i = 0;
  int drop_depth = 0;
  std::string dropping;
  while (i < source.size()) {
    if (source[i] == '<') {
      if (source.compare(i, 4, "<!--") == 0) {
        const auto end = source.find("-->", i + 4);
        i = end == std::string::npos ? source.size() : end + 3;
        continue;
      }
      const auto end = source.find('>', i);
      if (end == std::string::npos) break;
      const auto tag = std::string_view(source).substr(i, end - i + 1);
      const auto name = tag_name(tag);
      const bool closing = tag.size() > 1 && tag[1] == '/';
      const bool self_closing = tag.size() > 2 && tag[tag.size() - 2] == '/';
      if (drop_depth > 0) {
        if (name == dropping) drop_depth += closing ? -1 : (self_closing ? 0 : 1);
      } else if (kDropped.contains(name) && !closing && !self_closing) {
        dropping = name;
        drop_depth = 1;
      } else if (kBlock.contains(name)) {
        out.push_back('\n');
      }
      i = end + 1;
      continue;
    }
    if (drop_depth == 0) out.push_back(source[i]);
    ++i;
  }

  const auto decoded = decode_entities(out);
  std::string result;
  std::size_t pos = 0;
  while (pos <= decoded.size()) {
    auto eol = decoded.find('\n', pos);
    if (eol == std::string::npos) eol = decoded.size();
    const auto line = text::squash_whitespace(std::string_view(decoded).substr(pos, eol - pos));
    if (!line.empty()) {
      if (!result.empty()) result.push_back('\n');
      result += line;
    }
    pos = eol + 1;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus Corpus::from_json(const json& doc) {
  Corpus corpus;
  if (!doc.is_object() || !doc.contains("pages") || !doc["pages"].is_array()) {
    throw Error(Errc::FormatError, "corpus needs a \"pages\" array");
  }
  for (const auto& p : doc["pages"]) {
    Page page;
    page.url = p.at("url").get<std::string>();
    page.title = p.value("title", std::string());
    if (auto d = p.find("published_date"); d != p.end() && d->is_string()) {
      page.published_date = parse_partial_date(d->get<std::string>());
    }
    page.http_status = p.value("status", 200);
    if (p.contains("html")) {
      page.body = p["html"].get<std::string>();
      page.content_type = "text/html";
    } else {
      page.body = p.value("text", std::string());
      page.content_type = "text/plain";
    }
    const auto key = normalize_url(page.url);
    if (!corpus.by_url_.try_emplace(key, corpus.pages_.size()).second) {
      throw Error(Errc::FormatError, "duplicate corpus url " + page.url);
    }
    corpus.pages_.push_back(std::move(page));
  }
  return corpus;
}

Corpus Corpus::load(const std::filesystem::path& file) {
  const auto doc = json::parse(read_file(file), nullptr, false);
  if (doc.is_discarded()) throw Error(Errc::FormatError, "corpus is not JSON: " + file.string());
  return from_json(doc);
}

const Corpus::Page* Corpus::find(std::string_view url) const {
  std::string key;
  try {
    key = normalize_url(url);
  } catch (const Error&) {
    return nullptr;
  }
  const auto it = by_url_.find(key);
  return it == by_url_.end() ? nullptr : &pages_[it->second];
}

namespace {

std::string page_text(const Corpus::Page& page) {
  return page.content_type == "text/html" ? extract_main_text(page.body) : page.body;
}

class CorpusSearch final : public SearchBackend {
 public:
  explicit CorpusSearch(std::shared_ptr<const Corpus> corpus) : corpus_(std::move(corpus)) {
    for (const auto& page : corpus_->pages()) {
      const auto body = page_text(page);
      auto tokens = text::content_tokens(body);
      auto title = text::content_tokens(page.title);
      indexed_.push_back({std::set<std::string>(tokens.begin(), tokens.end()),
                          std::set<std::string>(title.begin(), title.end()), body});
    }
  }

  std::vector<SearchResult> search(const SearchQuery& q) override {
    std::string query = q.text;
    std::string site;
    if (const auto pos = query.find("site:"); pos != std::string::npos) {
      const auto end = query.find(' ', pos);
      site = text::to_lower(query.substr(pos + 5, end == std::string::npos ? std::string::npos : end - pos - 5));
      query.erase(pos, end == std::string::npos ? std::string::npos : end - pos + 1);
    }
    const auto terms = text::content_tokens(query);
    const std::set<std::string> unique(terms.begin(), terms.end());

    struct Scored {
      std::size_t index;
      std::size_t score;
    };
    std::vector<Scored> scored;
    const auto& pages = corpus_->pages();
    for (std::size_t i = 0; i < pages.size(); ++i) {
      if (!site.empty()) {
        const auto host = parse_url(pages[i].url)->host;
        if (host != site && !host.ends_with("." + site)) continue;
      }
      std::size_t score = 0;
      for (const auto& t : unique) {
        score += indexed_[i].body.contains(t) ? 1 : 0;
        score += indexed_[i].title.contains(t) ? 2 : 0;
      }
      if (score > 0) scored.push_back({i, score});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) { return a.score > b.score; });

    std::vector<SearchResult> out;
    for (const auto& s : scored) {
      if (static_cast<int>(out.size()) >= q.max_results) break;
      const auto& page = pages[s.index];
      out.push_back({page.url, page.title, best_snippet(indexed_[s.index].text, unique), page.published_date});
    }
    return out;
  }

 private:
  static std::string best_snippet(const std::string& body, const std::set<std::string>& terms) {
    std::string best;
    std::size_t best_score = 0;
    std::size_t start = 0;
    while (start < body.size()) {
      auto end = body.find_first_of(".\n", start);
      end = end == std::string::npos ? body.size() : end + 1;
      const auto sentence = text::squash_whitespace(std::string_view(body).substr(start, end - start));
      std::size_t score = 0;
      for (const auto& t : text::content_tokens(sentence)) score += terms.contains(t) ? 1 : 0;
      if (score > best_score || best.empty()) {
        if (score > best_score) best_score = score;
        if (!sentence.empty()) best = sentence;
      }
      start = end;
    }
    if (best.size() > 300) best = best.substr(0, 300);
    return best;
  }

  struct Indexed {
    std::set<std::string> body;
    std::set<std::string> title;
    std::string text;
  };
  std::shared_ptr<const Corpus> corpus_;
  std::vector<Indexed> indexed_;
};

class CorpusPages final : public PageSource {
 public:
  explicit CorpusPages(std::shared_ptr<const Corpus> corpus) : corpus_(std::move(corpus)) {}

  RawPage get(const std::string& url, std::chrono::milliseconds) override {
    const auto* page = corpus_->find(url);
    if (!page) return RawPage{404, "text/plain", ""};
    return RawPage{page->http_status, page->content_type, page->body};
  }

 private:
  std::shared_ptr<const Corpus> corpus_;
};

FetchStatus status_for(int http_status) {
  if (http_status == 0) return FetchStatus::Timeout;
  if (http_status == 402) return FetchStatus::Paywalled;
  if (http_status == 404 || http_status == 410) return FetchStatus::NotFound;
  return FetchStatus::Blocked;
}

bool transient(int http_status) { return http_status == 0 || http_status >= 500; }

json to_json(const FetchedDocument& d) {
  return {{"url", d.url}, {"content_text", d.content_text}, {"retrieved_at", d.retrieved_at},
          {"status", std::string(to_string(d.status))}};
}

std::optional<FetchedDocument> fetched_from_json(const json& j) {
  FetchedDocument d;
  d.url = j.value("url", std::string());
  d.content_text = j.value("content_text", std::string());
  d.retrieved_at = j.value("retrieved_at", std::string());
  const auto status = j.value("status", std::string());
  for (auto s : {FetchStatus::Ok, FetchStatus::Paywalled, FetchStatus::Blocked, FetchStatus::NotFound,
                 FetchStatus::Timeout}) {
    if (to_string(s) == status) {
      d.status = s;
      return d;
    }
  }
  return std::nullopt;
}

}  // namespace

std::shared_ptr<SearchBackend> make_corpus_search(std::shared_ptr<const Corpus> corpus) {
  return std::make_shared<CorpusSearch>(std::move(corpus));
}

std::shared_ptr<PageSource> make_corpus_pages(std::shared_ptr<const Corpus> corpus) {
  return std::make_shared<CorpusPages>(std::move(corpus));
}

// ---------------------------------------------------------------------------
// EvidenceTools

EvidenceTools::EvidenceTools(std::shared_ptr<SearchBackend> search, std::shared_ptr<PageSource> pages,
                             EvidenceOptions options)
    : search_(std::move(search)), pages_(std::move(pages)), options_(std::move(options)) {}

std::vector<SearchResult> EvidenceTools::search(const SearchQuery& q) {
  if (text::trim(q.text).empty()) throw Error(Errc::PreconditionViolation, "empty search query");
  if (q.max_results < 1) throw Error(Errc::PreconditionViolation, "max_results must be >= 1");
  if (!search_) throw Error(Errc::BackendUnavailable, "no search backend configured");

  std::vector<SearchResult> raw;
  for (int attempt = 0;; ++attempt) {
    try {
      raw = search_->search(q);
      break;
    } catch (const Error& e) {
      const bool retryable = e.code() == Errc::RateLimited || e.code() == Errc::BackendUnavailable;
      if (!retryable || attempt >= options_.search_retries) throw;
      std::this_thread::sleep_for(options_.retry_backoff * (1 << attempt));
    }
  }
  auto results = dedupe(std::move(raw));
  if (const auto cutoff = q.cutoff_date ? q.cutoff_date : options_.default_cutoff) {
    results = apply_cutoff(std::move(results), *cutoff);
  }
  if (static_cast<int>(results.size()) > q.max_results) results.resize(static_cast<std::size_t>(q.max_results));
  return results;
}

void EvidenceTools::acquire_host(const std::string& host) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] {
    return host_in_flight_[host] < options_.per_host_limit && global_in_flight_ < options_.global_fetch_limit;
  });
  ++host_in_flight_[host];
  ++global_in_flight_;
}

void EvidenceTools::release_host(const std::string& host) {
  {
    std::lock_guard lock(mu_);
    --host_in_flight_[host];
    --global_in_flight_;
  }
  cv_.notify_all();
}

std::size_t EvidenceTools::fetch_count() const {
  std::lock_guard lock(mu_);
  return fetches_;
}

FetchedDocument EvidenceTools::fetch_uncached(const std::string& url, const std::string& host) {
  FetchedDocument doc;
  doc.url = url;
  if (!pages_) {
    doc.status = FetchStatus::Blocked;
    return doc;
  }
  RawPage page;
  for (int attempt = 0; attempt <= options_.fetch_retries; ++attempt) {
    acquire_host(host);
    // The source may ignore the budget; run it detached and stop waiting.
    auto promise = std::make_shared<std::promise<RawPage>>();
    auto future = promise->get_future();
    std::thread([source = pages_, promise, url, budget = options_.fetch_budget] {
      try {
        promise->set_value(source->get(url, budget));
      } catch (...) {
        promise->set_value(RawPage{0, "", ""});
      }
    }).detach();
    const bool ready = future.wait_for(options_.fetch_budget) == std::future_status::ready;
    release_host(host);
    page = ready ? future.get() : RawPage{0, "", ""};
    if (!transient(page.http_status)) break;
    if (attempt < options_.fetch_retries) std::this_thread::sleep_for(options_.retry_backoff);
  }
  doc.retrieved_at = now_timestamp_utc();
  if (page.http_status >= 200 && page.http_status < 300) {
    doc.content_text = page.content_type.find("html") != std::string::npos ? extract_main_text(page.body)
                                                                           : std::string(text::trim(page.body));
    doc.status = doc.content_text.empty() ? FetchStatus::Blocked : FetchStatus::Ok;
  } else {
    doc.status = status_for(page.http_status);
  }
  return doc;
}

FetchedDocument EvidenceTools::fetch(const std::string& url) {
  const auto key = normalize_url(url);
  const auto host = parse_url(url)->host;
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }

  std::optional<std::filesystem::path> disk;
  if (options_.cache_dir) {
    disk = *options_.cache_dir / options_.cache_namespace / (sha256_hex(key) + ".json");
    if (std::filesystem::exists(*disk)) {
      const auto j = json::parse(read_file(*disk), nullptr, false);
      if (!j.is_discarded()) {
        if (auto cached = fetched_from_json(j)) {
          std::lock_guard lock(mu_);
          return cache_.try_emplace(key, *cached).first->second;
        }
      }
    }
  }

  auto doc = fetch_uncached(url, host);
  if (disk) write_file_atomic(*disk, to_json(doc).dump(2));
  std::lock_guard lock(mu_);
  ++fetches_;
  // A concurrent fetch of the same URL may have landed first; keep that one.
  return cache_.try_emplace(key, std::move(doc)).first->second;
}

}  // namespace dreval
