#pragma once

#include <filesystem>
#include <vector>

#include "dreval/app.hpp"
#include "dreval/harness.hpp"

namespace dreval::fixtures {

/// The bundled three-task fixture set with its extra pair and temporal
/// reports.
struct FixtureSet {
  std::filesystem::path root;
  RunConfig config;
  std::vector<TaskSpec> tasks;

  const TaskSpec& task(std::string_view id) const;
  Report report(std::string_view file, const TaskSpec& task) const;
  Protocol protocol(std::string_view task_id) const;
  /// Up-to-date, January 2025 and January 2024 variants of the TikTok report.
  std::vector<TemporalVariant> temporal_variants() const;
  Report sound_report() const;
  Report malformed_report() const;
};

/// Loads root/config.json and redirects results and cache to `scratch`.
FixtureSet load_fixture_set(const std::filesystem::path& root, const std::filesystem::path& scratch);

/// Gateway and evidence tools over the fixture corpus and recordings.
struct FixtureRuntime {
  std::shared_ptr<Gateway> gateway;
  std::shared_ptr<EvidenceTools> evidence;
};

FixtureRuntime make_runtime(const FixtureSet& set, std::shared_ptr<CompletionBackend> backend = nullptr);

}  // namespace dreval::fixtures
