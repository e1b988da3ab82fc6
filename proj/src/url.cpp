#include "dreval/url.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <vector>

#include "dreval/error.hpp"
#include "dreval/text.hpp"

namespace dreval {
namespace {

bool valid_host_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '-' || c == '.' || c == '_' || c >= 0x80;
}

bool is_tracking_param(std::string_view key) {
  const auto k = text::to_lower(key);
  return k == "utm" || k.starts_with("utm_") || k == "fbclid" || k == "gclid";
}

}  // namespace

bool Url::host_is_ip() const {
  if (host.find(':') != std::string::npos) return true;  // IPv6
  int parts = 0;
  size_t start = 0;
  while (start <= host.size()) {
    const auto dot = host.find('.', start);
    const auto part = std::string_view(host).substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty() || part.size() > 3 ||
        !std::all_of(part.begin(), part.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
      return false;
    }
    ++parts;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return parts == 4;
}

std::optional<Url> parse_url(std::string_view text) {
  text = text::trim(text);
  const auto sep = text.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  Url url;
  url.scheme = text::to_lower(text.substr(0, sep));
  if (url.scheme != "http" && url.scheme != "https") return std::nullopt;

  auto rest = text.substr(sep + 3);
  const auto auth_end = rest.find_first_of("/?#");
  auto authority = rest.substr(0, auth_end);
  rest = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);

  std::string_view host_part = authority;
  std::string_view port_part;
  if (authority.starts_with('[')) {
    const auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host_part = authority.substr(1, close - 1);
    const auto after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') return std::nullopt;
      port_part = after.substr(1);
    }
    if (host_part.empty()) return std::nullopt;
    url.host = text::to_lower(host_part);
  } else {
    if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
      host_part = authority.substr(0, colon);
      port_part = authority.substr(colon + 1);
    }
    while (host_part.ends_with('.')) host_part.remove_suffix(1);
    if (host_part.empty() || host_part.starts_with('.')) return std::nullopt;
    if (!std::all_of(host_part.begin(), host_part.end(), [](unsigned char c) { return valid_host_char(c); })) {
      return std::nullopt;
    }
    if (host_part.find("..") != std::string_view::npos) return std::nullopt;
    url.host = text::to_lower(host_part);
  }

  if (!port_part.empty()) {
    unsigned value = 0;
    const auto [ptr, ec] = std::from_chars(port_part.data(), port_part.data() + port_part.size(), value);
    if (ec != std::errc{} || ptr != port_part.data() + port_part.size() || value > 65535) return std::nullopt;
    url.port = static_cast<std::uint16_t>(value);
  }

  if (const auto hash = rest.find('#'); hash != std::string_view::npos) {
    url.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (const auto q = rest.find('?'); q != std::string_view::npos) {
    url.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  url.path = std::string(rest);
  if (std::any_of(url.path.begin(), url.path.end(), [](unsigned char c) { return std::isspace(c) != 0; })) {
    return std::nullopt;
  }
  return url;
}

std::string normalize_url(std::string_view text) {
  auto parsed = parse_url(text);
  if (!parsed) throw Error(Errc::MalformedUrl, std::string(text));
  const Url& u = *parsed;

  std::string out = u.scheme + "://";
  out += u.host.find(':') != std::string::npos ? "[" + u.host + "]" : u.host;
  const bool default_port = u.port && ((u.scheme == "http" && *u.port == 80) || (u.scheme == "https" && *u.port == 443));
  if (u.port && !default_port) out += ":" + std::to_string(*u.port);

  std::string path = u.path;
  while (!path.empty() && path.back() == '/') path.pop_back();
  out += path;

  std::vector<std::string_view> kept;
  std::string_view q = u.query;
  while (!q.empty()) {
    const auto amp = q.find('&');
    const auto param = q.substr(0, amp);
    const auto key = param.substr(0, param.find('='));
    if (!param.empty() && !is_tracking_param(key)) kept.push_back(param);
    if (amp == std::string_view::npos) break;
    q.remove_prefix(amp + 1);
  }
  for (size_t i = 0; i < kept.size(); ++i) {
    out += i == 0 ? '?' : '&';
    out += kept[i];
  }
  return out;
}

}  // namespace dreval
