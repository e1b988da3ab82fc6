#include "fixture_set.hpp"

#include "dreval/error.hpp"
#include "dreval/io.hpp"

namespace dreval::fixtures {

const TaskSpec& FixtureSet::task(std::string_view id) const {
  for (const auto& t : tasks) {
    if (t.task_id == id) return t;
  }
  throw Error(Errc::PreconditionViolation, "fixture set has no task " + std::string(id));
}

Report FixtureSet::report(std::string_view file, const TaskSpec& t) const {
  return parse_report(read_file(root / "reports" / std::string(file)), t.task_id, t.query);
}

Protocol FixtureSet::protocol(std::string_view task_id) const { return load_protocol(protocol_path(config, task_id)); }

std::vector<TemporalVariant> FixtureSet::temporal_variants() const {
  const auto& t = task("tiktok");
  using std::chrono::January;
  using std::chrono::year;
  return {
      {"current", std::nullopt, report("tiktok.md", t)},
      {"jan-2025", Date{year{2025}, January, std::chrono::day{1}}, report("tiktok_jan25.md", t)},
      {"jan-2024", Date{year{2024}, January, std::chrono::day{1}}, report("tiktok_jan24.md", t)},
  };
}

Report FixtureSet::sound_report() const { return report("heatwave_sound.md", task("heatwave")); }
Report FixtureSet::malformed_report() const { return report("heatwave_malformed.md", task("heatwave")); }

FixtureSet load_fixture_set(const std::filesystem::path& root, const std::filesystem::path& scratch) {
  FixtureSet set;
  set.root = root;
  set.config = load_config(root / "config.json");
  set.config.results_dir = scratch / "results";
  set.config.cache_dir = scratch / "cache";
  set.tasks = load_tasks(root / "tasks.json");
  return set;
}

FixtureRuntime make_runtime(const FixtureSet& set, std::shared_ptr<CompletionBackend> backend) {
  const auto& c = set.config;
  GatewayOptions gopts;
  gopts.mode = c.mode;
  gopts.max_in_flight = c.max_in_flight;
  auto corpus = std::make_shared<const Corpus>(Corpus::load(c.evidence.corpus));
  EvidenceOptions eopts;
  eopts.cache_dir = c.cache_dir;
  eopts.cache_namespace = "fixtures";
  return {std::make_shared<Gateway>(gopts, std::move(backend), std::make_shared<FixtureStore>(c.fixture_dir)),
          std::make_shared<EvidenceTools>(make_corpus_search(corpus), make_corpus_pages(corpus), eopts)};
}

}  // namespace dreval::fixtures
