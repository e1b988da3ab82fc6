#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>

#include "dreval/schema.hpp"

namespace dreval {

struct JudgeRequest {
  std::string role_prompt;
  std::string user_prompt;
  json output_schema;  // JSON-Schema subset; "title" names the task
  double temperature = 0.0;
  int max_attempts = 3;
};

struct JudgeResponse {
  json payload;
  std::string raw_text;
  json provider_meta = json::object();
};

struct FixtureKey {
  std::string digest;  // sha256 of (role_prompt, user_prompt, output_schema)

  friend bool operator==(const FixtureKey&, const FixtureKey&) = default;
};

FixtureKey fixture_key(const JudgeRequest& req);

/// Why `raw` fails the request schema, or nullopt if it conforms.
std::optional<std::string> validation_error(const JudgeRequest& req, std::string_view raw);

/// Next attempt after a malformed reply: the validator's message and the
/// rejected text are appended to the user prompt and max_attempts drops by
/// one. Throws Error(AttemptsExhausted) when no attempt would remain and
/// Error(PreconditionViolation) when `malformed_text` actually validates.
JudgeRequest with_repair(const JudgeRequest& req, std::string_view malformed_text);

/// Something that turns a request into raw model text.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual std::string complete(const JudgeRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Content-addressed directory of request/response pairs:
/// <dir>/<digest[0..2]>/<digest>.json. Reads are concurrent, writes are
/// serialized and atomic.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  std::optional<JudgeResponse> find(const FixtureKey& key) const;
  void put(const FixtureKey& key, const JudgeRequest& req, const JudgeResponse& resp);
  std::size_t size() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const FixtureKey& key) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
};

enum class BackendMode { Live, Record, Replay };

std::string_view to_string(BackendMode m) noexcept;
std::optional<BackendMode> parse_backend_mode(std::string_view s) noexcept;

struct GatewayOptions {
  BackendMode mode = BackendMode::Replay;
  std::size_t max_in_flight = 4;
  int rate_limit_retries = 3;
  std::chrono::milliseconds rate_limit_backoff{500};
};

/// Schema-checked judged completions with record/replay.
class Gateway {
 public:
  Gateway(GatewayOptions options, std::shared_ptr<CompletionBackend> backend, std::shared_ptr<FixtureStore> store);

  /// Throws Error(SchemaViolation) after max_attempts malformed replies,
  /// Error(FixtureMiss) in replay mode for unknown requests, and whatever the
  /// backend throws (BackendUnavailable, RateLimited).
  JudgeResponse complete_structured(const JudgeRequest& req);

  BackendMode mode() const { return options_.mode; }
  std::size_t backend_calls() const { return backend_calls_.load(); }

 private:
  std::string call_backend(const JudgeRequest& req);

  GatewayOptions options_;
  std::shared_ptr<CompletionBackend> backend_;
  std::shared_ptr<FixtureStore> store_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<std::size_t> backend_calls_{0};
};

struct OpenAiCompatibleConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::string model;
  std::chrono::seconds timeout{120};
};

/// Chat-completions backend for OpenAI-compatible providers.
std::shared_ptr<CompletionBackend> make_openai_compatible_backend(OpenAiCompatibleConfig config);

}  // namespace dreval
