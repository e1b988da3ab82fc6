#include "httplib.h"

#include "dreval/error.hpp"
#include "dreval/evidence.hpp"
#include "dreval/gateway.hpp"
#include "dreval/url.hpp"

namespace dreval {
namespace {

std::string origin_of(const Url& u) {
  std::string out = u.scheme + "://" + (u.host.find(':') != std::string::npos ? "[" + u.host + "]" : u.host);
  if (u.port) out += ":" + std::to_string(*u.port);
  return out;
}

httplib::Client make_client(const std::string& origin, std::chrono::milliseconds timeout) {
  httplib::Client client(origin);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                (timeout.count() % 1000) * 1000);
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                          (timeout.count() % 1000) * 1000);
  client.set_follow_location(true);
  return client;
}

class OpenAiCompatibleBackend final : public CompletionBackend {
 public:
  explicit OpenAiCompatibleBackend(OpenAiCompatibleConfig config) : config_(std::move(config)) {
    if (!parse_url(config_.base_url)) throw Error(Errc::ConfigError, "provider base URL is not absolute");
  }

  std::string complete(const JudgeRequest& req) override {
    const json body = {
        {"model", config_.model},
        {"temperature", req.temperature},
        {"response_format", {{"type", "json_object"}}},
        {"messages",
         json::array({
             {{"role", "system"},
              {"content", req.role_prompt + "\n\nRespond with exactly one JSON object conforming to this JSON "
                                            "schema:\n" + req.output_schema.dump()}},
             {{"role", "user"}, {"content", req.user_prompt}},
         })},
    };
    auto client = make_client(origin_of(*parse_url(config_.base_url)), config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res) throw Error(Errc::BackendUnavailable, "provider unreachable: " + httplib::to_string(res.error()));
    if (res->status == 429) throw Error(Errc::RateLimited, "provider returned 429");
    if (res->status != 200) {
      throw Error(Errc::BackendUnavailable, "provider returned HTTP " + std::to_string(res->status));
    }
    const auto doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::BackendUnavailable, "provider reply is not JSON");
    try {
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw Error(Errc::BackendUnavailable, "provider reply lacks choices[0].message.content");
    }
  }

  std::string name() const override { return "openai-compatible:" + config_.model; }

 private:
  OpenAiCompatibleConfig config_;
};

class HttpSearch final : public SearchBackend {
 public:
  HttpSearch(std::string endpoint, std::chrono::seconds timeout) : endpoint_(std::move(endpoint)), timeout_(timeout) {
    if (!parse_url(endpoint_)) throw Error(Errc::ConfigError, "search endpoint is not absolute: " + endpoint_);
  }

  std::vector<SearchResult> search(const SearchQuery& q) override {
    const auto url = *parse_url(endpoint_);
    auto client = make_client(origin_of(url), timeout_);
    httplib::Params params{{"q", q.text}, {"n", std::to_string(q.max_results)}};
    if (q.cutoff_date) params.emplace("before", format_iso_date(*q.cutoff_date));
    auto res = client.Get(url.path.empty() ? "/" : url.path, params, httplib::Headers{});
    if (!res) throw Error(Errc::BackendUnavailable, "search unreachable: " + httplib::to_string(res.error()));
    if (res->status == 429) throw Error(Errc::RateLimited, "search returned 429");
    if (res->status != 200) throw Error(Errc::BackendUnavailable, "search returned HTTP " + std::to_string(res->status));
    const auto doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("results")) throw Error(Errc::BackendUnavailable, "malformed search reply");
    std::vector<SearchResult> out;
    for (const auto& r : doc["results"]) {
      if (r.contains("url")) out.push_back(search_result_from_json(r));
    }
    return out;
  }

 private:
  std::string endpoint_;
  std::chrono::seconds timeout_;
};

class HttpPages final : public PageSource {
 public:
  RawPage get(const std::string& url, std::chrono::milliseconds budget) override {
    const auto parsed = parse_url(url);
    if (!parsed) return RawPage{404, "", ""};
    auto client = make_client(origin_of(*parsed), budget);
    const auto path = (parsed->path.empty() ? "/" : parsed->path) + (parsed->query.empty() ? "" : "?" + parsed->query);
    auto res = client.Get(path, httplib::Headers{{"User-Agent", "dreval/1.0"}});
    if (!res) return RawPage{0, "", ""};
    return RawPage{res->status, res->get_header_value("Content-Type"), res->body};
  }
};

}  // namespace

std::shared_ptr<CompletionBackend> make_openai_compatible_backend(OpenAiCompatibleConfig config) {
  return std::make_shared<OpenAiCompatibleBackend>(std::move(config));
}

std::shared_ptr<SearchBackend> make_http_search(std::string endpoint, std::chrono::seconds timeout) {
  return std::make_shared<HttpSearch>(std::move(endpoint), timeout);
}

std::shared_ptr<PageSource> make_http_pages() { return std::make_shared<HttpPages>(); }

}  // namespace dreval
