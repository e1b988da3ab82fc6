#include "dreval/config.hpp"

#include <cstdlib>
#include <set>

#include "dreval/error.hpp"
#include "dreval/io.hpp"

namespace dreval {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<Date> date_field(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  const auto s = j[key].get<std::string>();
  auto d = parse_iso_date(s);
  if (!d) throw Error(Errc::ConfigError, std::string(key) + ": expected YYYY-MM-DD, got \"" + s + "\"");
  return d;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!known.contains(k)) throw Error(Errc::ConfigError, "unknown config key " + where + k);
  }
}

}  // namespace

RunConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
  reject_unknown(j,
                 {"version", "mode", "provider", "evidence", "workers", "item_workers", "max_in_flight", "today",
                  "cutoff_date", "kic_items", "rq_items", "protocol_step_budget", "rq_step_budget", "max_claims",
                  "queries_per_claim", "results_per_query", "fetches_per_claim", "paths"},
                 "");
  RunConfig c;
  try {
    if (j.contains("version") && j["version"] != 1) {
      throw Error(Errc::SchemaVersionMismatch, "config version " + j["version"].dump() + " is not supported");
    }
    if (j.contains("mode")) {
      auto m = parse_backend_mode(j["mode"].get<std::string>());
      if (!m) throw Error(Errc::ConfigError, "mode must be live, record or replay");
      c.mode = *m;
    }
    if (j.contains("provider")) {
      const auto& p = j["provider"];
      reject_unknown(p, {"base_url", "path", "model", "timeout_s"}, "provider.");
      c.provider.base_url = p.value("base_url", c.provider.base_url);
      c.provider.path = p.value("path", c.provider.path);
      c.provider.model = p.value("model", c.provider.model);
      c.provider.timeout = std::chrono::seconds(p.value("timeout_s", 120));
    }
    if (j.contains("evidence")) {
      const auto& e = j["evidence"];
      reject_unknown(e,
                     {"backend", "corpus", "search_endpoint", "fetch_budget_ms", "fetch_retries", "search_retries",
                      "per_host_limit", "global_fetch_limit"},
                     "evidence.");
      c.evidence.backend = e.value("backend", c.evidence.backend);
      if (c.evidence.backend != "corpus" && c.evidence.backend != "http") {
        throw Error(Errc::ConfigError, "evidence.backend must be corpus or http");
      }
      if (e.contains("corpus")) c.evidence.corpus = resolve(base_dir, e["corpus"].get<std::string>());
      c.evidence.search_endpoint = e.value("search_endpoint", c.evidence.search_endpoint);
      c.evidence.fetch_budget = std::chrono::milliseconds(e.value("fetch_budget_ms", 10'000));
      c.evidence.fetch_retries = e.value("fetch_retries", c.evidence.fetch_retries);
      c.evidence.search_retries = e.value("search_retries", c.evidence.search_retries);
      c.evidence.per_host_limit = e.value("per_host_limit", c.evidence.per_host_limit);
      c.evidence.global_fetch_limit = e.value("global_fetch_limit", c.evidence.global_fetch_limit);
    }
    c.workers = j.value("workers", c.workers);
    c.item_workers = j.value("item_workers", c.item_workers);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.today = date_field(j, "today");
    c.cutoff_date = date_field(j, "cutoff_date");
    if (j.contains("kic_items")) {
      c.min_kic = j["kic_items"].at(0).get<int>();
      c.max_kic = j["kic_items"].at(1).get<int>();
    }
    if (j.contains("rq_items")) {
      c.min_rq = j["rq_items"].at(0).get<int>();
      c.max_rq = j["rq_items"].at(1).get<int>();
    }
    c.protocol_step_budget = j.value("protocol_step_budget", c.protocol_step_budget);
    c.rq_step_budget = j.value("rq_step_budget", c.rq_step_budget);
    c.max_claims = j.value("max_claims", c.max_claims);
    c.queries_per_claim = j.value("queries_per_claim", c.queries_per_claim);
    c.results_per_query = j.value("results_per_query", c.results_per_query);
    c.fetches_per_claim = j.value("fetches_per_claim", c.fetches_per_claim);
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      reject_unknown(p, {"protocol_dir", "cache_dir", "fixture_dir", "results_dir"}, "paths.");
      if (p.contains("protocol_dir")) c.protocol_dir = p["protocol_dir"].get<std::string>();
      if (p.contains("cache_dir")) c.cache_dir = p["cache_dir"].get<std::string>();
      if (p.contains("fixture_dir")) c.fixture_dir = p["fixture_dir"].get<std::string>();
      if (p.contains("results_dir")) c.results_dir = p["results_dir"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  for (auto* p : {&c.protocol_dir, &c.cache_dir, &c.fixture_dir, &c.results_dir}) {
    if (p->is_relative()) *p = base_dir / *p;
  }
  if (c.min_kic < 1 || c.max_kic < c.min_kic || c.min_rq < 1 || c.max_rq < c.min_rq) {
    throw Error(Errc::ConfigError, "item bounds must satisfy 1 <= min <= max");
  }
  if (c.workers == 0 || c.item_workers == 0 || c.max_in_flight == 0) {
    throw Error(Errc::ConfigError, "worker counts must be positive");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigError, file.string() + ": " + e.what());
  }
  return config_from_json(j, file.parent_path());
}

json to_json(const RunConfig& c) {
  auto opt_date = [](const std::optional<Date>& d) { return d ? json(format_iso_date(*d)) : json(nullptr); };
  return {
      {"version", 1},
      {"mode", to_string(c.mode)},
      {"provider",
       {{"base_url", c.provider.base_url},
        {"path", c.provider.path},
        {"model", c.provider.model},
        {"timeout_s", c.provider.timeout.count()}}},
      {"evidence",
       {{"backend", c.evidence.backend},
        {"corpus", c.evidence.corpus.filename().string()},
        {"search_endpoint", c.evidence.search_endpoint},
        {"fetch_budget_ms", c.evidence.fetch_budget.count()},
        {"fetch_retries", c.evidence.fetch_retries},
        {"search_retries", c.evidence.search_retries},
        {"per_host_limit", c.evidence.per_host_limit},
        {"global_fetch_limit", c.evidence.global_fetch_limit}}},
      {"workers", c.workers},
      {"item_workers", c.item_workers},
      {"max_in_flight", c.max_in_flight},
      {"today", opt_date(c.today)},
      {"cutoff_date", opt_date(c.cutoff_date)},
      {"kic_items", {c.min_kic, c.max_kic}},
      {"rq_items", {c.min_rq, c.max_rq}},
      {"protocol_step_budget", c.protocol_step_budget},
      {"rq_step_budget", c.rq_step_budget},
      {"max_claims", c.max_claims},
      {"queries_per_claim", c.queries_per_claim},
      {"results_per_query", c.results_per_query},
      {"fetches_per_claim", c.fetches_per_claim},
  };
}

void apply_environment(RunConfig& c) {
  auto env = [](std::string_view name) -> std::optional<std::string> {
    const char* v = std::getenv(std::string(name).c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  if (auto v = env(kEnvApiKey)) c.provider.api_key = *v;
  if (auto v = env(kEnvBaseUrl)) c.provider.base_url = *v;
  if (auto v = env(kEnvModel)) c.provider.model = *v;
}

void validate_config(const RunConfig& c) {
  if (c.mode == BackendMode::Replay && !std::filesystem::is_directory(c.fixture_dir)) {
    throw Error(Errc::FixtureMiss, "replay mode needs recorded fixtures but " + c.fixture_dir.string() +
                                       " does not exist");
  }
  if (c.mode != BackendMode::Replay) {
    if (c.provider.base_url.empty() || c.provider.model.empty()) {
      throw Error(Errc::ConfigError, std::string(to_string(c.mode)) + " mode needs a provider base_url and model (" +
                                         std::string(kEnvBaseUrl) + ", " + std::string(kEnvModel) + ")");
    }
    if (c.provider.api_key.empty()) {
      throw Error(Errc::ConfigError,
                  std::string(to_string(c.mode)) + " mode needs credentials in " + std::string(kEnvApiKey));
    }
  }
  if (c.evidence.backend == "corpus" && c.evidence.corpus.empty()) {
    throw Error(Errc::ConfigError, "evidence.corpus is required for the corpus backend");
  }
  if (c.evidence.backend == "http" && c.evidence.search_endpoint.empty()) {
    throw Error(Errc::ConfigError, "evidence.search_endpoint is required for the http backend");
  }
}

}  // namespace dreval
