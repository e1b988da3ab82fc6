#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace dreval {

/// Rule set from a public_suffix_list.dat file.
class PublicSuffixList {
 public:
  /// Parses the .dat format. With icann_only, parsing stops at the private
  /// domains section.
  static PublicSuffixList parse(std::string_view dat, bool icann_only = true);

  /// The list compiled into the library (data/public_suffix_list.dat).
  static const PublicSuffixList& bundled();

  /// Longest matching public suffix of a lowercase host; never empty for a
  /// non-empty host because of the implicit "*" rule.
  std::string public_suffix(std::string_view host) const;

  /// Suffix plus one label, or nullopt when host is itself a public suffix.
  std::optional<std::string> registrable_domain(std::string_view host) const;

  std::size_t rule_count() const { return exact_.size() + wildcard_.size() + exception_.size(); }

 private:
  std::unordered_set<std::string> exact_;
  std::unordered_set<std::string> wildcard_;   // "ck" for "*.ck"
  std::unordered_set<std::string> exception_;  // "www.ck" for "!www.ck"
};

/// Registrable domain (eTLD+1) of a cited URL: lowercase, no scheme, port,
/// path, or leading "www.".
struct RootDomain {
  std::string value;

  friend auto operator<=>(const RootDomain&, const RootDomain&) = default;
};

/// Throws Error(MalformedUrl) for non-URL input and Error(UnknownSuffix)
/// for IPs, localhost, and hosts that are themselves public suffixes.
RootDomain extract_root_domain(std::string_view url, const PublicSuffixList& psl = PublicSuffixList::bundled());

/// extract_root_domain, falling back to the full host on UnknownSuffix.
/// `fallback` is set when the fallback was taken.
RootDomain root_domain_or_host(std::string_view url, bool* fallback = nullptr,
                               const PublicSuffixList& psl = PublicSuffixList::bundled());

}  // namespace dreval
