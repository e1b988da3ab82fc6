#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dreval::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
bool contains_icase(std::string_view haystack, std::string_view needle);

/// Lowercased word tokens (ASCII alnum runs plus any non-ASCII bytes).
std::vector<std::string> word_tokens(std::string_view s);

/// word_tokens minus stopwords and one/two-letter tokens.
std::vector<std::string> content_tokens(std::string_view s);

/// Tokens that carry a specific value: anything containing a digit.
std::vector<std::string> numeric_tokens(std::string_view s);

/// Collapses runs of whitespace to single spaces and trims.
std::string squash_whitespace(std::string_view s);

bool is_stopword(std::string_view lower_word);

}  // namespace dreval::text
