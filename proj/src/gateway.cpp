#include "dreval/gateway.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <mutex>
#include <thread>

#include "dreval/error.hpp"
#include "dreval/io.hpp"

namespace dreval {

namespace {
constexpr int kFixtureVersion = 1;
}

FixtureKey fixture_key(const JudgeRequest& req) {
  const json canonical = json::array({req.role_prompt, req.user_prompt, req.output_schema.dump()});
  return FixtureKey{sha256_hex(canonical.dump())};
}

std::optional<std::string> validation_error(const JudgeRequest& req, std::string_view raw) {
  const auto parsed = extract_json_object(raw);
  if (!parsed) return std::string("reply does not contain a JSON object");
  return validate_schema(*parsed, req.output_schema);
}

JudgeRequest with_repair(const JudgeRequest& req, std::string_view malformed_text) {
  const auto error = validation_error(req, malformed_text);
  if (!error) throw Error(Errc::PreconditionViolation, "reply already satisfies the schema");
  if (req.max_attempts <= 1) throw Error(Errc::AttemptsExhausted, *error);
  JudgeRequest next = req;
  next.max_attempts = req.max_attempts - 1;
  next.user_prompt += "\n\nYOUR PREVIOUS REPLY WAS REJECTED.\nValidation error: " + *error +
                      "\nRejected reply:\n" + std::string(malformed_text) +
                      "\nReply again with a single JSON object that satisfies the schema.";
  return next;
}

FixtureStore::FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path FixtureStore::path_for(const FixtureKey& key) const {
  return dir_ / key.digest.substr(0, 2) / (key.digest + ".json");
}

std::optional<JudgeResponse> FixtureStore::find(const FixtureKey& key) const {
  std::shared_lock lock(mu_);
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  const auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.contains("response")) throw Error(Errc::CorruptFile, path.string());
  const auto& r = doc["response"];
  return JudgeResponse{r.at("payload"), r.at("raw_text").get<std::string>(), r.value("provider_meta", json::object())};
}

void FixtureStore::put(const FixtureKey& key, const JudgeRequest& req, const JudgeResponse& resp) {
  std::unique_lock lock(mu_);
  json doc = {
      {"version", kFixtureVersion},
      {"key", key.digest},
      {"request",
       {{"role_prompt", req.role_prompt}, {"user_prompt", req.user_prompt}, {"output_schema", req.output_schema}}},
      {"response", {{"payload", resp.payload}, {"raw_text", resp.raw_text}, {"provider_meta", resp.provider_meta}}},
  };
  write_file_atomic(path_for(key), doc.dump(2) + "\n");
}

std::size_t FixtureStore::size() const {
  std::shared_lock lock(mu_);
  if (!std::filesystem::is_directory(dir_)) return 0;
  std::size_t n = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir_)) {
    n += entry.is_regular_file() && entry.path().extension() == ".json" ? 1 : 0;
  }
  return n;
}

std::string_view to_string(BackendMode m) noexcept {
  switch (m) {
    case BackendMode::Live: return "live";
    case BackendMode::Record: return "record";
    case BackendMode::Replay: return "replay";
  }
  return "replay";
}

std::optional<BackendMode> parse_backend_mode(std::string_view s) noexcept {
  for (auto m : {BackendMode::Live, BackendMode::Record, BackendMode::Replay}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

Gateway::Gateway(GatewayOptions options, std::shared_ptr<CompletionBackend> backend,
                 std::shared_ptr<FixtureStore> store)
    : options_(options),
      backend_(std::move(backend)),
      store_(std::move(store)),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options.max_in_flight, 1, 1024))) {
  if (options_.mode != BackendMode::Live && !store_) {
    throw Error(Errc::ConfigError, "record and replay modes need a fixture store");
  }
  if (options_.mode != BackendMode::Replay && !backend_) {
    throw Error(Errc::ConfigError, "live and record modes need a backend");
  }
}

std::string Gateway::call_backend(const JudgeRequest& req) {
  for (int attempt = 0;; ++attempt) {
    in_flight_.acquire();
    try {
      ++backend_calls_;
      auto raw = backend_->complete(req);
      in_flight_.release();
      return raw;
    } catch (const Error& e) {
      in_flight_.release();
      if (e.code() != Errc::RateLimited || attempt >= options_.rate_limit_retries) throw;
      spdlog::warn("rate limited by {}, retrying", backend_->name());
      std::this_thread::sleep_for(options_.rate_limit_backoff * (1 << attempt));
    } catch (...) {
      in_flight_.release();
      throw;
    }
  }
}

JudgeResponse Gateway::complete_structured(const JudgeRequest& req) {
  const auto key = fixture_key(req);
  const auto title = req.output_schema.value("title", std::string("untitled"));
  if (options_.mode != BackendMode::Live) {
    if (auto hit = store_->find(key)) {
      if (auto err = validate_schema(hit->payload, req.output_schema)) {
        throw Error(Errc::SchemaViolation, "fixture " + key.digest + " " + *err);
      }
      return *hit;
    }
    if (options_.mode == BackendMode::Replay) {
      throw Error(Errc::FixtureMiss, "no recording for " + title + " request " + key.digest);
    }
  }

  JudgeRequest current = req;
  int attempts = 0;
  while (true) {
    ++attempts;
    auto raw = call_backend(current);
    if (auto error = validation_error(current, raw); !error) {
      JudgeResponse resp{*extract_json_object(raw), raw, {{"backend", backend_->name()}, {"attempts", attempts}}};
      if (options_.mode == BackendMode::Record) store_->put(key, req, resp);
      return resp;
    } else {
      try {
        current = with_repair(current, raw);
      } catch (const Error& e) {
        if (e.code() == Errc::AttemptsExhausted) throw Error(Errc::SchemaViolation, title + ": " + *error);
        throw;
      }
    }
  }
}

}  // namespace dreval
