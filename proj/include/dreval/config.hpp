#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

#include "dreval/date.hpp"
#include "dreval/gateway.hpp"

namespace dreval {

inline constexpr std::string_view kEnvApiKey = "DREVAL_API_KEY";
inline constexpr std::string_view kEnvBaseUrl = "DREVAL_BASE_URL";
inline constexpr std::string_view kEnvModel = "DREVAL_MODEL";

struct ProviderSettings {
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key;  // environment only; never serialized
  std::chrono::seconds timeout{120};
};

struct EvidenceSettings {
  std::string backend = "corpus";  // "corpus" or "http"
  std::filesystem::path corpus;    // pages.json for the corpus backend
  std::string search_endpoint;     // for the http backend
  std::chrono::milliseconds fetch_budget{10'000};
  int fetch_retries = 2;
  int search_retries = 2;
  std::size_t per_host_limit = 4;
  std::size_t global_fetch_limit = 16;
};

struct RunConfig {
  BackendMode mode = BackendMode::Replay;
  ProviderSettings provider;
  EvidenceSettings evidence;
  std::size_t workers = 4;        // concurrent tasks
  std::size_t item_workers = 8;   // concurrent claims / items within a task
  std::size_t max_in_flight = 8;  // concurrent judge calls
  std::optional<Date> today;      // pins "today"; defaults to the UTC date
  std::optional<Date> cutoff_date;
  int min_kic = 8, max_kic = 16, min_rq = 3, max_rq = 6;
  int protocol_step_budget = 20;
  int rq_step_budget = 15;
  std::size_t max_claims = 30;
  std::size_t queries_per_claim = 3;
  int results_per_query = 8;
  std::size_t fetches_per_claim = 5;
  std::filesystem::path protocol_dir = "protocols";
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path fixture_dir = "fixtures";
  std::filesystem::path results_dir = "results";

  Date effective_today() const { return today.value_or(today_utc()); }
};

/// Relative paths are resolved against `base_dir`. Unknown keys are a
/// ConfigError so typos do not pass silently.
RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);

/// Snapshot for manifests; carries no credentials.
json to_json(const RunConfig& c);

/// Fills provider settings from DREVAL_* variables when present.
void apply_environment(RunConfig& c);

/// Replay needs an existing fixture directory (FixtureMiss otherwise);
/// live and record need provider endpoint, model and key (ConfigError).
void validate_config(const RunConfig& c);

}  // namespace dreval
