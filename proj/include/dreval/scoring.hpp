#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dreval/labels.hpp"
#include "dreval/rubric.hpp"

namespace dreval {

/// A score in [0,1]; nullopt is the Undefined state (zero denominator).
using Score = std::optional<double>;

/// Reduced p/q with q > 0.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction reduced(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// (supp + part/2) / (supp + part + con). Neutral must be zero.
std::optional<Fraction> factuality_fraction(const LabelCounts& c);
/// (supp + part/2) / (supp + part + neu + con). Unverifiable never counts.
std::optional<Fraction> cf_fraction(const LabelCounts& c);

Score factuality_score(const LabelCounts& c);
Score cf_score(const LabelCounts& c);

/// n_cited / n_total; Undefined when n_total = 0. Throws
/// Error(PreconditionViolation) when n_cited > n_total.
Score claim_attribution(std::int64_t n_cited, std::int64_t n_total);

/// Harmonic mean of CA and CF. CA = 0 gives 0 even when CF is Undefined
/// (reports that cite nothing). `note`, if given, receives a diagnostic
/// when CA > 0 but CF is Undefined.
Score citation_integrity(Score ca, Score cf, std::string* note = nullptr);

/// Mean of S_d / 10 over rated domains.
Score da_score(std::span<const DomainRating> ratings);

/// Fraction of yes verdicts. Throws Error(EmptyChecklist) for K = 0.
double kic_score(const KicVerdicts& v);
Fraction kic_fraction(const KicVerdicts& v);

/// Mean R / 10. Throws Error(EmptyResults) for no items.
double rq_score(std::span<const RqResult> results);

/// Mean of the three dimension scores, divided by 100.
double wq_final(const WqScores& scores);
double wq_final(double ideas_content, double organization, double sentence_fluency);

struct ScorecardDiagnostics {
  std::vector<std::string> undefined_metrics;
  std::optional<double> unverifiable_fraction;
  std::map<std::string, std::int64_t> excluded_counts;
  std::vector<std::string> notes;
};

struct Scorecard {
  std::string task_id;
  std::string run_id;
  Score wq, factuality, ci, ca, cf, da, kic, rq;
  ScorecardDiagnostics diagnostics;
};

inline constexpr std::array<std::string_view, 8> kScorecardMetrics = {"wq", "factuality", "ci", "ca",
                                                                      "cf", "da",         "kic", "rq"};

Score& metric(Scorecard& s, std::string_view name);
const Score& metric(const Scorecard& s, std::string_view name);

/// Fills diagnostics.undefined_metrics from the current scores; only
/// metrics named in `evaluated` are listed.
void mark_undefined(Scorecard& s, std::span<const std::string> evaluated);

struct AggregateScorecard {
  std::size_t task_count = 0;
  std::map<std::string, Score> scores;                   // per metric
  std::map<std::string, std::int64_t> excluded_counts;   // tasks without a defined value
  std::vector<std::string> notes;
};

/// Per-metric unweighted mean over tasks where the metric is defined. The
/// dataset-level CI is the harmonic mean of the dataset CA and CF means.
/// Throws Error(EmptyTaskSet) for no tasks.
AggregateScorecard aggregate(std::span<const Scorecard> tasks);

/// Presentation: x100 rounded to two decimals, "-" for Undefined.
std::string format_percent(Score s);

}  // namespace dreval
