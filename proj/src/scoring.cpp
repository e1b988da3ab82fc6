#include "dreval/scoring.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "dreval/error.hpp"

namespace dreval {

Fraction Fraction::reduced(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(Errc::PreconditionViolation, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const auto g = std::gcd(num, den);
  return g == 0 ? Fraction{0, 1} : Fraction{num / g, den / g};
}

namespace {

// Both formulas weight a partial support as one half; doubling keeps the
// arithmetic in integers.
std::optional<Fraction> weighted_support(const LabelCounts& c, std::int64_t denominator) {
  if (denominator == 0) return std::nullopt;
  return Fraction::reduced(2 * c.supported + c.partially_supported, 2 * denominator);
}

void check_non_negative(const LabelCounts& c) {
  if (c.supported < 0 || c.partially_supported < 0 || c.neutral < 0 || c.contradicted < 0 || c.unverifiable < 0) {
    throw Error(Errc::PreconditionViolation, "negative label count");
  }
}

Score to_score(const std::optional<Fraction>& f) {
  if (!f) return std::nullopt;
  return f->value();
}

}  // namespace

std::optional<Fraction> factuality_fraction(const LabelCounts& c) {
  check_non_negative(c);
  if (c.neutral != 0) throw Error(Errc::PreconditionViolation, "factuality has no Neutral label");
  return weighted_support(c, c.supported + c.partially_supported + c.contradicted);
}

std::optional<Fraction> cf_fraction(const LabelCounts& c) {
  check_non_negative(c);
  return weighted_support(c, c.supported + c.partially_supported + c.neutral + c.contradicted);
}

Score factuality_score(const LabelCounts& c) { return to_score(factuality_fraction(c)); }

Score cf_score(const LabelCounts& c) { return to_score(cf_fraction(c)); }

Score claim_attribution(std::int64_t n_cited, std::int64_t n_total) {
  if (n_cited < 0 || n_total < 0 || n_cited > n_total) {
    throw Error(Errc::PreconditionViolation, "claim attribution needs 0 <= n_cited <= n_total");
  }
  if (n_total == 0) return std::nullopt;
  return Fraction::reduced(n_cited, n_total).value();
}

Score citation_integrity(Score ca, Score cf, std::string* note) {
  if (!ca) return std::nullopt;
  if (*ca == 0.0) return 0.0;
  if (!cf) {
    if (note) *note = "citation integrity undefined: claims are cited but no citation could be judged";
    return std::nullopt;
  }
  if (*ca + *cf == 0.0) return 0.0;
  return 2.0 * *ca * *cf / (*ca + *cf);
}

Score da_score(std::span<const DomainRating> ratings) {
  if (ratings.empty()) return std::nullopt;
  std::int64_t total = 0;
  for (const auto& r : ratings) {
    if (r.score < 1 || r.score > 10) throw Error(Errc::PreconditionViolation, "domain score outside [1,10]");
    total += r.score;
  }
  return Fraction::reduced(total, 10 * static_cast<std::int64_t>(ratings.size())).value();
}

Fraction kic_fraction(const KicVerdicts& v) {
  if (v.verdicts.empty()) throw Error(Errc::EmptyChecklist, "no KIC items");
  std::int64_t yes = 0;
  for (auto verdict : v.verdicts) yes += verdict == KicVerdict::Yes ? 1 : 0;
  return Fraction::reduced(yes, static_cast<std::int64_t>(v.verdicts.size()));
}

double kic_score(const KicVerdicts& v) { return kic_fraction(v).value(); }

double rq_score(std::span<const RqResult> results) {
  if (results.empty()) throw Error(Errc::EmptyResults, "no RQ results");
  std::int64_t total = 0;
  for (const auto& r : results) {
    if (r.score < 0 || r.score > 10) throw Error(Errc::PreconditionViolation, "RQ score outside [0,10]");
    total += r.score;
  }
  return Fraction::reduced(total, 10 * static_cast<std::int64_t>(results.size())).value();
}

double wq_final(double ideas_content, double organization, double sentence_fluency) {
  return (ideas_content + organization + sentence_fluency) / 3.0 / 100.0;
}

double wq_final(const WqScores& scores) {
  return wq_final(scores.dimensions[0].score, scores.dimensions[1].score, scores.dimensions[2].score);
}

Score& metric(Scorecard& s, std::string_view name) {
  if (name == "wq") return s.wq;
  if (name == "factuality") return s.factuality;
  if (name == "ci") return s.ci;
  if (name == "ca") return s.ca;
  if (name == "cf") return s.cf;
  if (name == "da") return s.da;
  if (name == "kic") return s.kic;
  if (name == "rq") return s.rq;
  throw Error(Errc::PreconditionViolation, "unknown metric " + std::string(name));
}

const Score& metric(const Scorecard& s, std::string_view name) {
  return metric(const_cast<Scorecard&>(s), name);
}

void mark_undefined(Scorecard& s, std::span<const std::string> evaluated) {
  s.diagnostics.undefined_metrics.clear();
  for (auto name : kScorecardMetrics) {
    if (std::find(evaluated.begin(), evaluated.end(), name) == evaluated.end()) continue;
    if (!metric(s, name)) s.diagnostics.undefined_metrics.emplace_back(name);
  }
}

AggregateScorecard aggregate(std::span<const Scorecard> tasks) {
  if (tasks.empty()) throw Error(Errc::EmptyTaskSet, "no scorecards to aggregate");
  AggregateScorecard out;
  out.task_count = tasks.size();
  for (auto name : kScorecardMetrics) {
    if (name == "ci") continue;
    double sum = 0;
    std::int64_t defined = 0;
    for (const auto& t : tasks) {
      if (const auto& v = metric(t, name)) {
        sum += *v;
        ++defined;
      }
    }
    out.scores[std::string(name)] = defined > 0 ? Score(sum / static_cast<double>(defined)) : std::nullopt;
    out.excluded_counts[std::string(name)] = static_cast<std::int64_t>(tasks.size()) - defined;
  }
  std::string note;
  out.scores["ci"] = citation_integrity(out.scores["ca"], out.scores["cf"], &note);
  if (!note.empty()) out.notes.push_back(note);
  std::int64_t ci_excluded = 0;
  for (const auto& t : tasks) ci_excluded += t.ci ? 0 : 1;
  out.excluded_counts["ci"] = ci_excluded;
  return out;
}

std::string format_percent(Score s) {
  if (!s) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *s * 100.0);
  return buf;
}

}  // namespace dreval
