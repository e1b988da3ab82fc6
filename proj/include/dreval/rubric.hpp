#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dreval {

enum class WqDimension { IdeasContent, Organization, SentenceFluency };

struct WqSubDimension {
  std::string_view key;     // JSON field name in judge output
  std::string_view name;
  double weight;
  std::string_view prompt;  // exact rubric description
};

struct WqDimensionRubric {
  WqDimension dimension;
  std::string_view key;
  std::string_view name;
  std::span<const WqSubDimension> subs;
};

/// The fixed writing-quality rubric: three dimensions with weighted
/// sub-dimensions. Weights within each dimension sum to 1.
std::span<const WqDimensionRubric, 3> wq_rubric();

const WqDimensionRubric& wq_rubric(WqDimension d);

struct WqDimensionScore {
  WqDimension dimension;
  std::vector<double> sub_scores;  // aligned with rubric subs, each in [0,100]
  double score = 0;                // sum of weight * sub_score
  std::string rationale;
};

struct WqScores {
  std::array<WqDimensionScore, 3> dimensions;
};

/// Weighted sum of sub-scores for one dimension. Throws
/// Error(PreconditionViolation) on arity mismatch or a score outside [0,100].
double wq_dimension_score(WqDimension d, std::span<const double> sub_scores);

enum class KicVerdict { No = 0, Yes = 1 };

struct KicVerdicts {
  std::vector<KicVerdict> verdicts;  // aligned with Protocol::kic_items
  std::vector<std::string> justifications;
};

struct RqDeduction {
  std::string reason;
  int points = 0;
};

struct RqResult {
  std::size_t item_index = 0;
  int score = 10;  // R in [0,10]
  std::vector<RqDeduction> deductions;
  std::vector<std::string> transcript;
  bool incomplete = false;
};

/// max(0, 10 - sum of points).
int rq_raw_score(std::span<const RqDeduction> deductions);

}  // namespace dreval
