#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dreval/domain.hpp"

namespace dreval {

enum class FactualityLabel { Supported, PartiallySupported, Contradicted, Unverifiable };

enum class FaithfulnessLabel { Supported, PartiallySupported, Neutral, Contradicted, Unverifiable };

std::string_view to_string(FactualityLabel label) noexcept;
std::string_view to_string(FaithfulnessLabel label) noexcept;
std::optional<FactualityLabel> parse_factuality_label(std::string_view s) noexcept;
std::optional<FaithfulnessLabel> parse_faithfulness_label(std::string_view s) noexcept;

/// Rank for "best source wins": Supported > PartiallySupported > Neutral >
/// Contradicted > Unverifiable.
int faithfulness_rank(FaithfulnessLabel label) noexcept;

struct LabelCounts {
  std::int64_t supported = 0;
  std::int64_t partially_supported = 0;
  std::int64_t neutral = 0;
  std::int64_t contradicted = 0;
  std::int64_t unverifiable = 0;

  void add(FactualityLabel label);
  void add(FaithfulnessLabel label);
  std::int64_t total() const { return supported + partially_supported + neutral + contradicted + unverifiable; }

  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

enum class DomainCategory { Government, Academic, News, Commercial, Other };

std::string_view to_string(DomainCategory c) noexcept;
std::optional<DomainCategory> parse_domain_category(std::string_view s) noexcept;

enum class AuthorityBand { Low, Moderate, High, Definitive };

/// 1-3 Low, 4-6 Moderate, 7-8 High, 9-10 Definitive.
AuthorityBand authority_band(int score);
std::string_view to_string(AuthorityBand b) noexcept;

struct DomainRating {
  RootDomain domain;
  DomainCategory category = DomainCategory::Other;
  int score = 1;  // S_d in [1, 10]
  std::string rationale;
};

}  // namespace dreval
