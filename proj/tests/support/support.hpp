#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "dreval/evidence.hpp"
#include "dreval/gateway.hpp"
#include "dreval/report.hpp"

namespace dreval::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Backend driven by a callback; counts calls.
class FnBackend final : public CompletionBackend {
 public:
  using Fn = std::function<std::string(const JudgeRequest&)>;
  explicit FnBackend(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const JudgeRequest& req) override {
    ++calls_;
    return fn_(req);
  }
  std::string name() const override { return "fn"; }
  std::size_t calls() const { return calls_.load(); }

 private:
  Fn fn_;
  std::atomic<std::size_t> calls_{0};
};

/// Replies with `json` for every request.
std::shared_ptr<FnBackend> constant_backend(const json& reply);

/// Live-mode gateway over `backend` (no fixture store involved).
std::shared_ptr<Gateway> live_gateway(std::shared_ptr<CompletionBackend> backend);

/// Search backend over a fixed result list; returns up to max_results in order.
class ListSearch final : public SearchBackend {
 public:
  explicit ListSearch(std::vector<SearchResult> results) : results_(std::move(results)) {}
  std::vector<SearchResult> search(const SearchQuery& q) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::vector<SearchResult> results_;
  std::atomic<std::size_t> calls_{0};
};

/// Page source over a url -> page map; unknown urls are 404.
class MapPages final : public PageSource {
 public:
  void add(const std::string& url, RawPage page);
  void add_text(const std::string& url, const std::string& text);
  RawPage get(const std::string& url, std::chrono::milliseconds budget) override;

 private:
  std::mutex mu_;
  std::map<std::string, RawPage> pages_;
};

/// Evidence tools over the given backends with no cache directory.
std::shared_ptr<EvidenceTools> evidence_over(std::shared_ptr<SearchBackend> search, std::shared_ptr<PageSource> pages,
                                             EvidenceOptions options = {});

Report report_of(std::string_view markdown, std::string task_id = "t", std::string query = "q");

Date ymd(int y, unsigned m, unsigned d);

/// Seed for property tests; fixed so failures reproduce.
inline constexpr std::uint64_t kPropertySeed = 0x5eed'd4e7'a11u;

}  // namespace dreval::testing
