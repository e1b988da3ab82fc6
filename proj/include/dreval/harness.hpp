#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dreval/adaptive.hpp"
#include "dreval/scoring.hpp"
#include "dreval/workflow.hpp"

namespace dreval {

struct ClaimVariant {
  std::string claim;
  std::string url;
};

struct ClaimPair {
  int id = 0;
  std::string topic;
  ClaimVariant truth;
  ClaimVariant falsehood;  // cited to a source that agrees with it
};

/// JSON array of {id, topic, true: {claim, url}, false: {claim, url}}.
/// Throws FormatError naming the offending line.
std::vector<ClaimPair> parse_pairs(std::string_view text, std::string_view source = "<pairs>");
std::vector<ClaimPair> load_pairs(const std::filesystem::path& file);

struct CorruptionConfig {
  double r = 0;
  std::size_t n = 15;
  /// When set, the corrupted pairs are a seeded shuffle instead of the
  /// lowest ids.
  std::optional<std::uint64_t> seed;
};

/// k = round(r * n), rounding halves up.
std::size_t corrupted_count(double r, std::size_t n);

struct BatchClaim {
  int pair_id = 0;
  std::string topic;
  bool is_false = false;
  std::string text;
  std::string url;
};

/// The first n pairs by id; k of them contribute their false variant.
/// Throws PreconditionViolation for r outside [0,1] or n beyond the pairs.
std::vector<BatchClaim> build_batch(const std::vector<ClaimPair>& pairs, const CorruptionConfig& cfg);

class ClaimVerifier {
 public:
  virtual ~ClaimVerifier() = default;
  virtual FactualityLabel verify(const BatchClaim& claim) = 0;
};

class ClaimAligner {
 public:
  virtual ~ClaimAligner() = default;
  virtual FaithfulnessLabel align(const BatchClaim& claim) = 0;
};

/// Ground truth: true variants Supported, false variants Contradicted.
class OracleVerifier final : public ClaimVerifier {
 public:
  FactualityLabel verify(const BatchClaim& claim) override;
};

/// Reference-free factuality pipeline on the bare claim text.
class PipelineVerifier final : public ClaimVerifier {
 public:
  PipelineVerifier(Gateway& gateway, EvidenceTools& evidence, WorkflowOptions options);
  FactualityLabel verify(const BatchClaim& claim) override;

 private:
  Gateway& gateway_;
  EvidenceTools& evidence_;
  WorkflowOptions options_;
};

/// Citation-alignment check that only asks whether the paired source
/// agrees with the claim. Every pair is built so that it does.
class ConstructedAligner final : public ClaimAligner {
 public:
  FaithfulnessLabel align(const BatchClaim& claim) override;
};

/// Citation-faithfulness judgment against the fetched paired source.
class PipelineAligner final : public ClaimAligner {
 public:
  PipelineAligner(Gateway& gateway, EvidenceTools& evidence);
  FaithfulnessLabel align(const BatchClaim& claim) override;

 private:
  Gateway& gateway_;
  EvidenceTools& evidence_;
};

struct SweepPoint {
  double r = 0;
  std::size_t k = 0;
  Score factuality;
  Score alignment;
  std::optional<std::string> error;  // set when the point failed
};

struct SweepCurve {
  std::vector<SweepPoint> points;
};

/// r = i/n for i = 0..n.
std::vector<double> default_grid(std::size_t n = 15);

/// Grid must be strictly increasing within [0,1]. A failing point is kept
/// with its error instead of aborting the sweep.
SweepCurve run_sweep(const std::vector<ClaimPair>& pairs, const std::vector<double>& grid, std::size_t n,
                     ClaimVerifier& verifier, ClaimAligner& aligner, std::optional<std::uint64_t> seed = std::nullopt);

json sweep_to_json(const SweepCurve& curve, const json& config);
std::string to_csv(const SweepCurve& curve);

/// (sound - malformed) / sound. Throws DegenerateBaseline when sound is 0.
double relative_degradation(double rq_sound, double rq_malformed);

struct PairComparison {
  double rq_sound = 0;
  double rq_malformed = 0;
  double relative_degradation = 0;
  RqRun sound_run;
  RqRun malformed_run;
};

PairComparison compare_pairs(Gateway& gateway, EvidenceTools& evidence, const Report& sound, const Report& malformed,
                             const Protocol& protocol, int step_budget = 15, std::size_t workers = 4);

struct TemporalVariant {
  std::string label;
  std::optional<Date> knowledge_cutoff;  // nullopt for an up-to-date report
  Report report;
};

struct TemporalPoint {
  std::string label;
  std::optional<Date> knowledge_cutoff;
  double kic = 0;
  KicRun run;
};

/// KIC per variant against one protocol built from current evidence,
/// ordered most recent first (up-to-date, then descending cutoff).
std::vector<TemporalPoint> temporal_run(Gateway& gateway, const Protocol& protocol,
                                        std::vector<TemporalVariant> variants, std::size_t workers = 8);

}  // namespace dreval
