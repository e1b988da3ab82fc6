#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dreval {

struct Url {
  std::string scheme;  // "http" or "https", lowercase
  std::string host;    // lowercase, no trailing dot; IPv6 without brackets
  std::optional<std::uint16_t> port;
  std::string path;    // begins with '/' or is empty
  std::string query;   // without '?'
  std::string fragment;

  bool host_is_ip() const;
};

/// Parses an absolute http(s) URL; nullopt for anything else.
std::optional<Url> parse_url(std::string_view text);

/// Identity used for citation dedup and cache keys: lowercase scheme and
/// host, default port dropped, fragment dropped, tracking parameters
/// (utm, utm_*, fbclid, gclid) dropped, trailing '/' stripped from the path.
/// Throws Error(MalformedUrl) for non-URL input.
std::string normalize_url(std::string_view text);

}  // namespace dreval
