#include "dreval/domain.hpp"

#include <vector>

#include "dreval/error.hpp"
#include "dreval/text.hpp"
#include "dreval/url.hpp"

namespace dreval {

std::string_view bundled_public_suffix_dat();  // generated

namespace {

std::vector<std::string_view> split_labels(std::string_view host) {
  std::vector<std::string_view> labels;
  size_t start = 0;
  while (true) {
    const auto dot = host.find('.', start);
    labels.push_back(host.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return labels;
}

std::string join_from(const std::vector<std::string_view>& labels, size_t first) {
  std::string out;
  for (size_t i = first; i < labels.size(); ++i) {
    if (i > first) out.push_back('.');
    out.append(labels[i]);
  }
  return out;
}

}  // namespace

PublicSuffixList PublicSuffixList::parse(std::string_view dat, bool icann_only) {
  PublicSuffixList psl;
  size_t pos = 0;
  while (pos < dat.size()) {
    auto eol = dat.find('\n', pos);
    if (eol == std::string_view::npos) eol = dat.size();
    auto line = text::trim(dat.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.starts_with("//")) {
      if (icann_only && line.find("===BEGIN PRIVATE DOMAINS===") != std::string_view::npos) break;
      continue;
    }
    // Rules end at the first whitespace.
    if (const auto ws = line.find_first_of(" \t"); ws != std::string_view::npos) line = line.substr(0, ws);
    if (line.empty()) continue;
    auto rule = text::to_lower(line);
    if (rule.starts_with('!')) {
      psl.exception_.insert(rule.substr(1));
    } else if (rule.starts_with("*.")) {
      psl.wildcard_.insert(rule.substr(2));
    } else {
      psl.exact_.insert(std::move(rule));
    }
  }
  return psl;
}

const PublicSuffixList& PublicSuffixList::bundled() {
  static const PublicSuffixList list = parse(bundled_public_suffix_dat(), true);
  return list;
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
  const auto labels = split_labels(host);
  // Exception rules win outright; the suffix is the rule minus its first label.
  for (size_t i = 0; i < labels.size(); ++i) {
    if (exception_.contains(join_from(labels, i))) return join_from(labels, i + 1);
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    const auto candidate = join_from(labels, i);
    if (exact_.contains(candidate)) return candidate;
    if (i + 1 < labels.size() && wildcard_.contains(join_from(labels, i + 1))) return candidate;
  }
  return std::string(labels.back());
}

std::optional<std::string> PublicSuffixList::registrable_domain(std::string_view host) const {
  if (host.empty()) return std::nullopt;
  const auto suffix = public_suffix(host);
  if (suffix.size() >= host.size()) return std::nullopt;
  const auto head = host.substr(0, host.size() - suffix.size() - 1);
  const auto dot = head.rfind('.');
  return std::string(dot == std::string_view::npos ? head : head.substr(dot + 1)) + "." + suffix;
}

RootDomain extract_root_domain(std::string_view url, const PublicSuffixList& psl) {
  const auto parsed = parse_url(url);
  if (!parsed) throw Error(Errc::MalformedUrl, std::string(url));
  if (parsed->host_is_ip() || parsed->host == "localhost" || parsed->host.ends_with(".localhost")) {
    throw Error(Errc::UnknownSuffix, parsed->host);
  }
  std::string_view host = parsed->host;
  while (host.starts_with("www.")) host.remove_prefix(4);
  auto registrable = psl.registrable_domain(host);
  if (!registrable) throw Error(Errc::UnknownSuffix, parsed->host);
  return RootDomain{std::move(*registrable)};
}

RootDomain root_domain_or_host(std::string_view url, bool* fallback, const PublicSuffixList& psl) {
  if (fallback) *fallback = false;
  try {
    return extract_root_domain(url, psl);
  } catch (const Error& e) {
    if (e.code() != Errc::UnknownSuffix) throw;
    if (fallback) *fallback = true;
    return RootDomain{parse_url(url)->host};
  }
}

}  // namespace dreval
