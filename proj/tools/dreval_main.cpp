#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dreval/app.hpp"
#include "dreval/error.hpp"

namespace {

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto slash = item.find('/');
    try {
      grid.push_back(slash == std::string::npos ? std::stod(item)
                                                : std::stod(item.substr(0, slash)) / std::stod(item.substr(slash + 1)));
    } catch (const std::exception&) {
      throw dreval::Error(dreval::Errc::ConfigError, "bad grid value \"" + item + "\"");
    }
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("dreval"));

  CLI::App app{"Evaluate research reports with query-specific protocols and fixed metrics."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file, mode, fixtures, today, cutoff;
  std::size_t workers = 0;
  bool verbose = false;
  app.add_option("--config", config_file, "Run configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "Judge backend mode")->check(CLI::IsMember({"live", "record", "replay"}));
  app.add_option("--fixtures", fixtures, "Fixture directory for record/replay");
  app.add_option("--today", today, "Pin the current date (YYYY-MM-DD)");
  app.add_option("--cutoff-date", cutoff, "Hide evidence published after this date (YYYY-MM-DD)");
  app.add_option("--workers", workers, "Concurrent tasks");
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* create = app.add_subcommand("protocol-create", "Build evaluation protocols for queries");
  std::string create_input;
  create->add_option("tasks", create_input, "Task manifest (.json) or a text file with one query")
      ->required()
      ->check(CLI::ExistingFile);

  auto* evaluate = app.add_subcommand("evaluate", "Score reports and write scorecards");
  std::string eval_input, metrics = "wq,factuality,ci,da,kic,rq";
  evaluate->add_option("tasks", eval_input, "Task manifest with report paths")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--metrics", metrics, "Comma-separated subset of wq,factuality,ci,da,kic,rq");

  auto* score = app.add_subcommand("score", "Aggregate scorecards into a table");
  std::string score_dir;
  score->add_option("dir", score_dir, "Directory of *.scorecard.json (default: results dir)");

  auto* sweep = app.add_subcommand("sweep", "Factuality corruption sweep over claim pairs");
  std::string pair_file = std::string(DREVAL_DATA_DIR) + "/table9_pairs.json", grid;
  std::size_t n = 15;
  std::uint64_t seed = 0;
  bool pipeline = false;
  sweep->add_option("--pairs", pair_file, "Pair file")->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid, "Comma-separated rates, fractions allowed (default i/n)");
  sweep->add_option("--n", n, "Batch size");
  auto* seed_opt = sweep->add_option("--seed", seed, "Pick corrupted pairs by seeded shuffle");
  sweep->add_flag("--pipeline", pipeline, "Verify with the factuality pipeline instead of the oracle");

  auto* inspect = app.add_subcommand("inspect", "Pretty-print a stored artifact");
  std::string artifact;
  inspect->add_option("path", artifact, "Protocol, scorecard, audit, manifest or report")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::debug);

  if (inspect->parsed()) return dreval::cmd_inspect(artifact, std::cout).exit_code;

  try {
    dreval::AppContext ctx;
    ctx.config = config_file.empty() ? dreval::config_from_json(dreval::json::object(), std::filesystem::current_path())
                                     : dreval::load_config(config_file);
    dreval::apply_environment(ctx.config);
    if (!mode.empty()) ctx.config.mode = *dreval::parse_backend_mode(mode);
    if (!fixtures.empty()) ctx.config.fixture_dir = fixtures;
    auto date_flag = [](const std::string& s, const char* name) {
      auto d = dreval::parse_iso_date(s);
      if (!d) throw dreval::Error(dreval::Errc::ConfigError, std::string(name) + " expects YYYY-MM-DD");
      return *d;
    };
    if (!today.empty()) ctx.config.today = date_flag(today, "--today");
    if (!cutoff.empty()) ctx.config.cutoff_date = date_flag(cutoff, "--cutoff-date");
    if (workers > 0) ctx.config.workers = workers;
    ctx.out = &std::cout;

    dreval::CommandResult result;
    if (create->parsed()) {
      result = dreval::cmd_protocol_create(ctx, create_input);
    } else if (evaluate->parsed()) {
      result = dreval::cmd_evaluate(ctx, eval_input, dreval::parse_metric_filter(metrics));
    } else if (score->parsed()) {
      result = dreval::cmd_score(ctx, score_dir.empty() ? ctx.config.results_dir : std::filesystem::path(score_dir));
    } else if (sweep->parsed()) {
      dreval::SweepArgs args;
      args.pair_file = pair_file;
      if (!grid.empty()) args.grid = parse_grid(grid);
      args.n = n;
      args.oracle = !pipeline;
      if (seed_opt->count() > 0) args.seed = seed;
      result = dreval::cmd_sweep(ctx, args);
    }
    for (const auto& o : result.outputs) spdlog::info("wrote {}", o.string());
    if (!result.run_id.empty()) spdlog::info("run_id {}", result.run_id);
    return result.exit_code;
  } catch (const dreval::Error& e) {
    spdlog::error("{}", e.what());
    return dreval::kExitFatal;
  }
}
