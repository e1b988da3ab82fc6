// Regenerates the bundled fixture recordings and protocols by running every
// fixture scenario in record mode against the scripted judge.

#include <spdlog/spdlog.h>

#include <iostream>

#include "CLI11.hpp"
#include "dreval/error.hpp"
#include "scripted/fixture_set.hpp"
#include "scripted/scripted_judge.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Record fixture judgments with the scripted judge"};
  std::string root = DREVAL_FIXTURE_DIR;
  std::string scratch = "make-fixtures-scratch";
  bool clean = false;
  app.add_option("--fixtures", root, "Fixture set root")->check(CLI::ExistingDirectory);
  app.add_option("--scratch", scratch, "Directory for throwaway results and caches");
  app.add_flag("--clean", clean, "Delete existing recordings and protocols first");
  CLI11_PARSE(app, argc, argv);

  using namespace dreval;
  try {
    auto set = fixtures::load_fixture_set(root, scratch);
    if (clean) {
      std::filesystem::remove_all(set.config.fixture_dir);
      std::filesystem::remove_all(set.config.protocol_dir);
    }
    std::filesystem::create_directories(set.config.fixture_dir);
    set.config.mode = BackendMode::Record;

    AppContext ctx;
    ctx.config = set.config;
    ctx.backend = scripted::make_scripted_judge();
    ctx.out = &std::cout;
    if (auto r = cmd_protocol_create(ctx, set.root / "tasks.json"); r.exit_code != kExitOk) return r.exit_code;
    if (auto r = cmd_evaluate(ctx, set.root / "tasks.json", kAllMetrics); r.exit_code != kExitOk) return r.exit_code;

    auto rt = fixtures::make_runtime(set, ctx.backend);
    const auto pair = compare_pairs(*rt.gateway, *rt.evidence, set.sound_report(), set.malformed_report(),
                                    set.protocol("heatwave"), set.config.rq_step_budget);
    std::cout << "pair: sound " << pair.rq_sound << " malformed " << pair.rq_malformed << " degradation "
              << pair.relative_degradation << "\n";
    for (const auto& p : temporal_run(*rt.gateway, set.protocol("tiktok"), set.temporal_variants())) {
      std::cout << "temporal " << p.label << ": kic " << p.kic << "\n";
    }
    std::cout << "judge calls recorded: " << rt.gateway->backend_calls() << " (pair/temporal)\n";
    return 0;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
