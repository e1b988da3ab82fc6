#include "support.hpp"

#include <chrono>

namespace dreval::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = std::filesystem::temp_directory_path() /
          ("dreval-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::shared_ptr<FnBackend> constant_backend(const json& reply) {
  return std::make_shared<FnBackend>([text = reply.dump()](const JudgeRequest&) { return text; });
}

std::shared_ptr<Gateway> live_gateway(std::shared_ptr<CompletionBackend> backend) {
  GatewayOptions opts;
  opts.mode = BackendMode::Live;
  opts.rate_limit_backoff = std::chrono::milliseconds(1);
  return std::make_shared<Gateway>(opts, std::move(backend), nullptr);
}

std::vector<SearchResult> ListSearch::search(const SearchQuery& q) {
  ++calls_;
  std::vector<SearchResult> out;
  for (const auto& r : results_) {
    if (static_cast<int>(out.size()) >= q.max_results) break;
    out.push_back(r);
  }
  return out;
}

void MapPages::add(const std::string& url, RawPage page) {
  std::lock_guard lock(mu_);
  pages_[url] = std::move(page);
}

void MapPages::add_text(const std::string& url, const std::string& text) { add(url, {200, "text/plain", text}); }

RawPage MapPages::get(const std::string& url, std::chrono::milliseconds) {
  std::lock_guard lock(mu_);
  auto it = pages_.find(url);
  return it == pages_.end() ? RawPage{404, "text/plain", ""} : it->second;
}

std::shared_ptr<EvidenceTools> evidence_over(std::shared_ptr<SearchBackend> search, std::shared_ptr<PageSource> pages,
                                             EvidenceOptions options) {
  options.retry_backoff = std::chrono::milliseconds(1);
  return std::make_shared<EvidenceTools>(std::move(search), std::move(pages), options);
}

Report report_of(std::string_view markdown, std::string task_id, std::string query) {
  return parse_report(markdown, std::move(task_id), std::move(query));
}

Date ymd(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}; }

}  // namespace dreval::testing
