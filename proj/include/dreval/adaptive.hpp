#pragma once

#include <set>
#include <string>
#include <vector>

#include "dreval/agent.hpp"
#include "dreval/protocol.hpp"
#include "dreval/report.hpp"
#include "dreval/rubric.hpp"

namespace dreval {

/// One judged call per writing-quality dimension using the fixed rubric.
WqScores evaluate_wq(Gateway& gateway, const Report& report, std::size_t workers = 3);

struct KicRun {
  KicVerdicts verdicts;  // aligned with protocol.kic_items
  std::vector<std::string> diagnostics;
};

/// One independent call per checklist item, judged from report text only.
/// A failing item becomes "no" with a diagnostic. Throws EmptyChecklist.
KicRun evaluate_kic(Gateway& gateway, const Report& report, const Protocol& protocol, std::size_t workers = 8);

enum class RqFault { UnsupportedCausalClaim, CircularArgument, IgnoredCounterEvidence, MinorGap };

std::string_view to_string(RqFault f) noexcept;
std::optional<RqFault> parse_rq_fault(std::string_view s) noexcept;
/// Fixed deduction schedule: 3, 3, 2 and 1 points.
int deduction_points(RqFault f) noexcept;

/// Agent loop following the item's validation plan. Running out of steps
/// forces a final scoring call on the evidence gathered so far and flags
/// the result incomplete.
RqResult execute_rq(Gateway& gateway, EvidenceTools& evidence, const Report& report, const RqItem& item,
                    std::size_t item_index, const std::set<std::string>& tools, int step_budget = 15);

struct RqRun {
  std::vector<RqResult> results;
  double score = 0;  // mean R / 10
};

RqRun evaluate_rq(Gateway& gateway, EvidenceTools& evidence, const Report& report, const Protocol& protocol,
                  int step_budget = 15, std::size_t workers = 4);

json to_json(const WqScores& s);
json kic_audit(const Protocol& protocol, const KicRun& run);
json to_json(const RqResult& r);

}  // namespace dreval
