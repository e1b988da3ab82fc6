#include "dreval/rubric.hpp"

#include <algorithm>
#include <numeric>

#include "dreval/error.hpp"

namespace dreval {
namespace {

constexpr std::array<WqSubDimension, 4> kIdeasContent{{
    {"main_idea_clarity", "Main Idea Clarity", 0.25,
     "This dimension assesses the clarity and specificity of the main idea expressed in the section summary. A "
     "high-quality section will present a focused and well-articulated central idea that is tightly aligned with "
     "the report question. Summaries lacking precision, or that simply list general topics without insight or "
     "framing, should be penalized. Do not give high scores if the main idea is vague, overgeneralized, or merely "
     "implied."},
    {"detail_relevance", "Detail Relevance", 0.25,
     "This dimension focuses on how well the supporting details in the summary reinforce the main idea. Bullet "
     "points should be specific, relevant, and purposefully selected. Low-quality summaries may include off-topic, "
     "overly generic, or redundant details that do not support the section's main message. Do not reward high "
     "scores based on the amount of content alone—focus on alignment and purpose."},
    {"information_density", "Information Density", 0.25,
     "This dimension measures the information richness of the section summary. High-density summaries use each "
     "bullet to convey important, non-obvious, and topic-specific content. Shallow summaries repeat known facts, use "
     "vague language, or include fluff. Length alone should not be rewarded—focus on content value per line."},
    {"conceptual_synthesis", "Conceptual Synthesis", 0.25,
     "This dimension evaluates the structural and conceptual integration in the summary. Look for signs of "
     "synthesis such as: grouping related points, identifying contrasts, cause-effect relationships, or thematic "
     "framing. Poor summaries are unordered lists with no visible logic. Do not reward correctness alone—this "
     "dimension rewards insight, not just content."},
}};

constexpr std::array<WqSubDimension, 3> kOrganization{{
    {"heading_structure", "Heading Structure", 0.3,
     "This dimension assesses the use and clarity of headings in the section. High-quality summaries include "
     "headings that meaningfully segment the content, reflect topic hierarchy, and help orient the reader. Avoid "
     "rewarding default, generic, or misaligned headings. Headings should reflect actual conceptual boundaries."},
    {"bullet_grouping_logic", "Bullet Grouping Logic", 0.4,
     "This dimension evaluates the internal logic of bullet groupings. High-quality summaries group related points "
     "together according to thematic, temporal, causal, or hierarchical logic. Low-quality groupings mix unrelated "
     "ideas, interrupt flow, or reflect no discernible principle."},
    {"structural_coherence", "Structural Coherence", 0.3,
     "This dimension assesses whether the section's structure contributes to a logical, easy-to-follow reading "
     "experience. A coherent structure will show consistent flow from one part to the next, maintain logical "
     "transitions between bullet blocks, and avoid jarring shifts. Low-scoring sections often feel fragmented, with "
     "unclear order, repetition, or misplaced content."},
}};

constexpr std::array<WqSubDimension, 3> kSentenceFluency{{
    {"rhythm_variety", "Rhythm & Variety", 0.3,
     "This dimension evaluates how naturally and dynamically the sentences flow. Strong writing features variation "
     "in sentence length and structure, avoiding repetitive patterns. Rhythm refers to the pacing and cadence of the "
     "prose—whether it reads with natural emphasis or becomes monotonous. High-scoring writing feels expressive "
     "and crafted, not just correct."},
    {"transition_smoothness", "Transition Smoothness", 0.3,
     "This dimension focuses on how smoothly the sentences connect to each other. High-quality prose includes "
     "natural linking phrases, varied connectors, and logical sequencing. Low-scoring writing jumps between ideas, "
     "or has jarring, abrupt shifts between sentences. Do not reward correctness alone—this dimension targets "
     "flow between thoughts."},
    {"readability_flow", "Readability & Flow", 0.4,
     "This dimension evaluates the overall readability and flow of the paragraph. High-scoring writing reads "
     "smoothly aloud and requires little effort to follow. Low-scoring writing may include awkward phrasing, "
     "overcomplex or confusing sentence structures, or poor pacing. This metric captures the global fluency felt by "
     "readers, especially in multi-sentence passages."},
}};

constexpr std::array<WqDimensionRubric, 3> kRubric{{
    {WqDimension::IdeasContent, "ideas_content", "Ideas and Content", kIdeasContent},
    {WqDimension::Organization, "organization", "Organization", kOrganization},
    {WqDimension::SentenceFluency, "sentence_fluency", "Sentence Fluency", kSentenceFluency},
}};

}  // namespace

std::span<const WqDimensionRubric, 3> wq_rubric() { return kRubric; }

const WqDimensionRubric& wq_rubric(WqDimension d) { return kRubric[static_cast<std::size_t>(d)]; }

double wq_dimension_score(WqDimension d, std::span<const double> sub_scores) {
  const auto& rubric = wq_rubric(d);
  if (sub_scores.size() != rubric.subs.size()) {
    throw Error(Errc::PreconditionViolation, "wrong number of sub-scores for " + std::string(rubric.name));
  }
  double total = 0;
  for (std::size_t i = 0; i < sub_scores.size(); ++i) {
    if (!(sub_scores[i] >= 0 && sub_scores[i] <= 100)) {
      throw Error(Errc::PreconditionViolation, "sub-score outside [0,100]");
    }
    total += rubric.subs[i].weight * sub_scores[i];
  }
  return total;
}

int rq_raw_score(std::span<const RqDeduction> deductions) {
  int total = 0;
  for (const auto& d : deductions) total += std::max(0, d.points);
  return std::max(0, 10 - total);
}

}  // namespace dreval
