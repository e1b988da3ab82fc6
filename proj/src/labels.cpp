#include "dreval/labels.hpp"

#include "dreval/error.hpp"
#include "dreval/text.hpp"

namespace dreval {

std::string_view to_string(FactualityLabel label) noexcept {
  switch (label) {
    case FactualityLabel::Supported: return "Supported";
    case FactualityLabel::PartiallySupported: return "PartiallySupported";
    case FactualityLabel::Contradicted: return "Contradicted";
    case FactualityLabel::Unverifiable: return "Unverifiable";
  }
  return "Unverifiable";
}

std::string_view to_string(FaithfulnessLabel label) noexcept {
  switch (label) {
    case FaithfulnessLabel::Supported: return "Supported";
    case FaithfulnessLabel::PartiallySupported: return "PartiallySupported";
    case FaithfulnessLabel::Neutral: return "Neutral";
    case FaithfulnessLabel::Contradicted: return "Contradicted";
    case FaithfulnessLabel::Unverifiable: return "Unverifiable";
  }
  return "Unverifiable";
}

std::optional<FactualityLabel> parse_factuality_label(std::string_view s) noexcept {
  for (auto l : {FactualityLabel::Supported, FactualityLabel::PartiallySupported, FactualityLabel::Contradicted,
                 FactualityLabel::Unverifiable}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::optional<FaithfulnessLabel> parse_faithfulness_label(std::string_view s) noexcept {
  for (auto l : {FaithfulnessLabel::Supported, FaithfulnessLabel::PartiallySupported, FaithfulnessLabel::Neutral,
                 FaithfulnessLabel::Contradicted, FaithfulnessLabel::Unverifiable}) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

int faithfulness_rank(FaithfulnessLabel label) noexcept {
  switch (label) {
    case FaithfulnessLabel::Supported: return 4;
    case FaithfulnessLabel::PartiallySupported: return 3;
    case FaithfulnessLabel::Neutral: return 2;
    case FaithfulnessLabel::Contradicted: return 1;
    case FaithfulnessLabel::Unverifiable: return 0;
  }
  return 0;
}

void LabelCounts::add(FactualityLabel label) {
  switch (label) {
    case FactualityLabel::Supported: ++supported; break;
    case FactualityLabel::PartiallySupported: ++partially_supported; break;
    case FactualityLabel::Contradicted: ++contradicted; break;
    case FactualityLabel::Unverifiable: ++unverifiable; break;
  }
}

void LabelCounts::add(FaithfulnessLabel label) {
  switch (label) {
    case FaithfulnessLabel::Supported: ++supported; break;
    case FaithfulnessLabel::PartiallySupported: ++partially_supported; break;
    case FaithfulnessLabel::Neutral: ++neutral; break;
    case FaithfulnessLabel::Contradicted: ++contradicted; break;
    case FaithfulnessLabel::Unverifiable: ++unverifiable; break;
  }
}

std::string_view to_string(DomainCategory c) noexcept {
  switch (c) {
    case DomainCategory::Government: return "Government";
    case DomainCategory::Academic: return "Academic";
    case DomainCategory::News: return "News";
    case DomainCategory::Commercial: return "Commercial";
    case DomainCategory::Other: return "Other";
  }
  return "Other";
}

std::optional<DomainCategory> parse_domain_category(std::string_view s) noexcept {
  for (auto c : {DomainCategory::Government, DomainCategory::Academic, DomainCategory::News,
                 DomainCategory::Commercial, DomainCategory::Other}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

AuthorityBand authority_band(int score) {
  if (score < 1 || score > 10) throw Error(Errc::PreconditionViolation, "domain score outside [1,10]");
  if (score >= 9) return AuthorityBand::Definitive;
  if (score >= 7) return AuthorityBand::High;
  if (score >= 4) return AuthorityBand::Moderate;
  return AuthorityBand::Low;
}

std::string_view to_string(AuthorityBand b) noexcept {
  switch (b) {
    case AuthorityBand::Low: return "Low";
    case AuthorityBand::Moderate: return "Moderate";
    case AuthorityBand::High: return "High";
    case AuthorityBand::Definitive: return "Definitive";
  }
  return "Low";
}

}  // namespace dreval
