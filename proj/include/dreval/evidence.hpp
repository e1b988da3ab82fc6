#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dreval/date.hpp"
#include "dreval/schema.hpp"

namespace dreval {

struct SearchQuery {
  std::string text;
  std::optional<Date> cutoff_date;
  int max_results = 8;
};

struct SearchResult {
  std::string url;
  std::string title;
  std::string snippet;
  std::optional<PartialDate> published_date;
};

enum class FetchStatus { Ok, Paywalled, Blocked, NotFound, Timeout };

std::string_view to_string(FetchStatus s) noexcept;

struct FetchedDocument {
  std::string url;
  std::string content_text;  // non-empty iff status == Ok
  std::string retrieved_at;
  FetchStatus status = FetchStatus::NotFound;
};

/// Raw HTTP-ish outcome of one page retrieval.
struct RawPage {
  int http_status = 0;  // 0 when the transport failed
  std::string content_type;
  std::string body;
};

class SearchBackend {
 public:
  virtual ~SearchBackend() = default;
  virtual std::vector<SearchResult> search(const SearchQuery& q) = 0;
};

class PageSource {
 public:
  virtual ~PageSource() = default;
  virtual RawPage get(const std::string& url, std::chrono::milliseconds budget) = 0;
};

/// First occurrence per normalized URL, order preserved. Results with an
/// unparseable URL are dropped.
std::vector<SearchResult> dedupe(std::vector<SearchResult> results);

/// Strict cutoff: keeps results whose latest possible publication day is on
/// or before `cutoff`; undated results are removed.
std::vector<SearchResult> apply_cutoff(std::vector<SearchResult> results, Date cutoff);

/// Main text of an HTML page: drops script/style/nav/header/footer/aside/
/// form blocks, prefers <main> or <article> when present, decodes common
/// entities, and keeps one line per block element.
std::string extract_main_text(std::string_view html);

json to_json(const SearchResult& r);
SearchResult search_result_from_json(const json& j);

/// Offline web stand-in: a list of pages with url/title/published_date/
/// status/text (or html). Search ranks pages by query-token overlap with the
/// title and text; fetch serves the page.
class Corpus {
 public:
  struct Page {
    std::string url;
    std::string title;
    std::optional<PartialDate> published_date;
    int http_status = 200;
    std::string content_type = "text/html";
    std::string body;
  };

  static Corpus load(const std::filesystem::path& file);
  static Corpus from_json(const json& doc);

  const std::vector<Page>& pages() const { return pages_; }
  const Page* find(std::string_view url) const;

 private:
  std::vector<Page> pages_;
  std::map<std::string, std::size_t> by_url_;  // normalized url -> index
};

std::shared_ptr<SearchBackend> make_corpus_search(std::shared_ptr<const Corpus> corpus);
std::shared_ptr<PageSource> make_corpus_pages(std::shared_ptr<const Corpus> corpus);

/// GET <endpoint>?q=<text>&n=<max> returning {"results":[{url,title,snippet,published_date}]}.
std::shared_ptr<SearchBackend> make_http_search(std::string endpoint, std::chrono::seconds timeout);
std::shared_ptr<PageSource> make_http_pages();

struct EvidenceOptions {
  std::chrono::milliseconds fetch_budget{10'000};
  int fetch_retries = 2;
  std::size_t per_host_limit = 4;
  std::size_t global_fetch_limit = 16;
  int search_retries = 2;
  std::chrono::milliseconds retry_backoff{200};
  /// Applied to queries that carry no cutoff of their own.
  std::optional<Date> default_cutoff;
  /// On-disk fetch cache root; entries live under <cache_dir>/<cache_namespace>.
  std::optional<std::filesystem::path> cache_dir;
  std::string cache_namespace = "default";
};

/// Search and fetch with dedup, strict cutoff, caching and politeness limits.
class EvidenceTools {
 public:
  EvidenceTools(std::shared_ptr<SearchBackend> search, std::shared_ptr<PageSource> pages, EvidenceOptions options = {});

  /// Throws Error(BackendUnavailable) or Error(RateLimited) after retries.
  std::vector<SearchResult> search(const SearchQuery& q);

  /// Throws Error(MalformedUrl) only; other failures become a status.
  FetchedDocument fetch(const std::string& url);

  const EvidenceOptions& options() const { return options_; }
  std::size_t fetch_count() const;

 private:
  FetchedDocument fetch_uncached(const std::string& url, const std::string& host);
  void acquire_host(const std::string& host);
  void release_host(const std::string& host);

  std::shared_ptr<SearchBackend> search_;
  std::shared_ptr<PageSource> pages_;
  EvidenceOptions options_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, std::size_t> host_in_flight_;
  std::size_t global_in_flight_ = 0;
  std::map<std::string, FetchedDocument> cache_;
  std::size_t fetches_ = 0;
};

}  // namespace dreval
