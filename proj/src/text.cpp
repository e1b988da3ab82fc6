#include "dreval/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace dreval::text {
namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

constexpr std::array kStopwords = {
    "a",     "about", "after", "all",   "also",  "an",    "and",   "any",   "are",   "as",
    "at",    "be",    "been",  "before", "being", "but",   "by",    "can",   "could", "did",
    "do",    "does",  "for",   "from",  "had",   "has",   "have",  "how",   "if",    "in",
    "into",  "is",    "it",    "its",   "may",   "more",  "most",  "no",    "not",   "of",
    "on",    "or",    "other", "our",   "over",  "report", "said", "she",   "should", "so",
    "some",  "such",  "than",  "that",  "the",   "their", "them",  "then",  "there", "these",
    "they",  "this",  "those", "to",    "under", "up",    "was",   "we",    "were",  "what",
    "when",  "where", "which", "while", "who",   "why",   "will",  "with",  "would", "you",
};

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  return to_lower(s.substr(0, prefix.size())) == to_lower(prefix);
}

bool contains_icase(std::string_view haystack, std::string_view needle) {
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    // Keep decimal points and thousands separators inside numbers.
    const bool inner_punct = (c == '.' || c == ',') && !cur.empty() &&
                             std::isdigit(static_cast<unsigned char>(cur.back())) &&
                             i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]));
    if (is_word_byte(c) || inner_punct) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool is_stopword(std::string_view lower_word) {
  return std::find(kStopwords.begin(), kStopwords.end(), lower_word) != kStopwords.end();
}

std::vector<std::string> content_tokens(std::string_view s) {
  auto words = word_tokens(s);
  std::erase_if(words, [](const std::string& w) { return w.size() < 3 || is_stopword(w); });
  return words;
}

std::vector<std::string> numeric_tokens(std::string_view s) {
  auto words = word_tokens(s);
  std::erase_if(words, [](const std::string& w) {
    return std::none_of(w.begin(), w.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
  });
  return words;
}

std::string squash_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(ch);
    }
  }
  return out;
}

}  // namespace dreval::text
