#include "dreval/app.hpp"

#include <spdlog/spdlog.h>

#include <iostream>
#include <mutex>
#include <sstream>

#include "dreval/adaptive.hpp"
#include "dreval/error.hpp"
#include "dreval/harness.hpp"
#include "dreval/io.hpp"
#include "dreval/parallel.hpp"
#include "dreval/protocol.hpp"
#include "dreval/results.hpp"
#include "dreval/text.hpp"
#include "dreval/workflow.hpp"

namespace dreval {
namespace {

namespace fs = std::filesystem;

struct Runtime {
  std::shared_ptr<Gateway> gateway;
  std::shared_ptr<EvidenceTools> evidence;
};

Runtime make_runtime(const AppContext& ctx, std::optional<Date> cutoff, std::string cache_namespace) {
  const auto& c = ctx.config;
  auto backend = ctx.backend;
  if (!backend && c.mode != BackendMode::Replay) {
    backend = make_openai_compatible_backend(
        {c.provider.base_url, c.provider.path, c.provider.api_key, c.provider.model, c.provider.timeout});
  }
  GatewayOptions gopts;
  gopts.mode = c.mode;
  gopts.max_in_flight = c.max_in_flight;
  auto store = std::make_shared<FixtureStore>(c.fixture_dir);

  auto search = ctx.search;
  auto pages = ctx.pages;
  if (!search || !pages) {
    if (c.evidence.backend == "http") {
      search = search ? search : make_http_search(c.evidence.search_endpoint, std::chrono::seconds(30));
      pages = pages ? pages : make_http_pages();
    } else {
      auto corpus = std::make_shared<const Corpus>(Corpus::load(c.evidence.corpus));
      search = search ? search : make_corpus_search(corpus);
      pages = pages ? pages : make_corpus_pages(corpus);
    }
  }
  EvidenceOptions eopts;
  eopts.fetch_budget = c.evidence.fetch_budget;
  eopts.fetch_retries = c.evidence.fetch_retries;
  eopts.search_retries = c.evidence.search_retries;
  eopts.per_host_limit = c.evidence.per_host_limit;
  eopts.global_fetch_limit = c.evidence.global_fetch_limit;
  eopts.default_cutoff = cutoff;
  eopts.cache_dir = c.cache_dir;
  eopts.cache_namespace = std::move(cache_namespace);
  return {std::make_shared<Gateway>(gopts, backend, store), std::make_shared<EvidenceTools>(search, pages, eopts)};
}

void validate(const AppContext& ctx) {
  auto c = ctx.config;
  if (ctx.backend && c.mode != BackendMode::Replay) {
    // A supplied judge stands in for the provider settings.
    c.provider.base_url = c.provider.base_url.empty() ? "supplied" : c.provider.base_url;
    c.provider.model = c.provider.model.empty() ? "supplied" : c.provider.model;
    c.provider.api_key = "supplied";
  }
  if (ctx.search && ctx.pages) {
    c.evidence.backend = "corpus";
    c.evidence.corpus = "supplied";
  }
  validate_config(c);
}

json digest_entry(const fs::path& p) { return {{"file", p.filename().string()}, {"sha256", sha256_hex(read_file(p))}}; }

json corpus_digest(const AppContext& ctx) {
  if (ctx.search && ctx.pages) return nullptr;
  if (ctx.config.evidence.backend == "corpus") return digest_entry(ctx.config.evidence.corpus);
  return {{"endpoint", ctx.config.evidence.search_endpoint}};
}

void write_manifest(const AppContext& ctx, const std::string& run_id, const std::string& command, const json& inputs,
                    const std::string& started, const CommandResult& result) {
  json outputs = json::array();
  for (const auto& o : result.outputs) outputs.push_back(o.filename().string());
  json manifest{{"version", 1},
                {"run_id", run_id},
                {"command", command},
                {"config", to_json(ctx.config)},
                {"inputs", inputs},
                {"tool", {{"name", "dreval"}, {"version", kToolVersion}}},
                {"started_at", started},
                {"finished_at", now_timestamp_utc()},
                {"exit_code", result.exit_code},
                {"outputs", outputs},
                {"errors", result.errors}};
  write_file_atomic(ctx.config.results_dir / "manifests" / (run_id + ".json"), manifest.dump(2) + "\n");
}

int exit_for(std::size_t ok, std::size_t total) {
  if (ok == total) return kExitOk;
  return ok == 0 ? kExitFatal : kExitPartial;
}

CommandResult fatal(std::string message) {
  spdlog::error("{}", message);
  CommandResult r;
  r.exit_code = kExitFatal;
  r.errors.push_back(std::move(message));
  return r;
}

std::string metric_list(const std::set<std::string>& metrics) {
  std::string out;
  for (const auto& m : {"wq", "factuality", "ci", "da", "kic", "rq"}) {
    if (!metrics.contains(m)) continue;
    if (!out.empty()) out += ',';
    out += m;
  }
  return out;
}

struct TaskOutcome {
  bool ok = false;
  std::vector<fs::path> outputs;
  std::string error;
};

TaskOutcome evaluate_task(const AppContext& ctx, Runtime& rt, const TaskSpec& task, const std::set<std::string>& metrics,
                          const std::string& run_id) {
  const auto& c = ctx.config;
  TaskOutcome outcome;
  Scorecard card;
  card.task_id = task.task_id;
  card.run_id = run_id;
  std::vector<json> audit;
  const auto report = parse_report(read_file(*task.report), task.task_id, task.query);
  for (const auto& d : report.diagnostics) card.diagnostics.notes.push_back("report: " + d);

  const auto wopts = workflow_options(c);
  auto note_all = [&](std::string_view metric, const std::vector<std::string>& diags) {
    for (const auto& d : diags) card.diagnostics.notes.push_back(std::string(metric) + ": " + d);
  };

  std::optional<Protocol> protocol;
  if (metrics.contains("kic") || metrics.contains("rq")) protocol = load_protocol(protocol_path(c, task.task_id));

  if (metrics.contains("wq")) {
    const auto wq = evaluate_wq(*rt.gateway, report, 3);
    card.wq = wq_final(wq);
    audit.push_back(to_json(wq));
  }
  if (metrics.contains("factuality")) {
    const auto run = run_factuality(*rt.gateway, *rt.evidence, report, wopts);
    card.factuality = factuality_score(run.counts);
    if (run.counts.total() > 0) {
      card.diagnostics.unverifiable_fraction =
          static_cast<double>(run.counts.unverifiable) / static_cast<double>(run.counts.total());
    }
    card.diagnostics.excluded_counts["factuality_unverifiable"] = run.counts.unverifiable;
    note_all("factuality", run.diagnostics);
    for (const auto& r : run.records) audit.push_back(to_json(r));
  }
  if (metrics.contains("ci")) {
    const auto run = run_ci(*rt.gateway, *rt.evidence, report, wopts);
    card.ca = claim_attribution(run.n_cited, run.n_total);
    card.cf = cf_score(run.cf_counts);
    std::string note;
    card.ci = citation_integrity(card.ca, card.cf, &note);
    if (!note.empty()) card.diagnostics.notes.push_back("ci: " + note);
    card.diagnostics.excluded_counts["cf_unverifiable"] = run.cf_counts.unverifiable;
    card.diagnostics.excluded_counts["ci_non_verifiable_claims"] = static_cast<std::int64_t>(run.excluded.size());
    note_all("ci", run.diagnostics);
    for (const auto& claim : run.excluded) audit.push_back({{"kind", "citation_excluded"}, {"claim", to_json(claim)}});
    for (const auto& r : run.records) audit.push_back(to_json(r));
  }
  if (metrics.contains("da")) {
    const auto run = run_da(*rt.gateway, report, wopts);
    card.da = da_score(run.ratings);
    note_all("da", run.diagnostics);
    for (const auto& r : run.records) audit.push_back(to_json(r));
  }
  if (metrics.contains("kic")) {
    const auto run = evaluate_kic(*rt.gateway, report, *protocol, c.item_workers);
    card.kic = kic_score(run.verdicts);
    note_all("kic", run.diagnostics);
    audit.push_back(kic_audit(*protocol, run));
  }
  if (metrics.contains("rq")) {
    const auto run = evaluate_rq(*rt.gateway, *rt.evidence, report, *protocol, c.rq_step_budget, c.item_workers);
    card.rq = run.score;
    for (const auto& r : run.results) audit.push_back(to_json(r));
  }

  std::vector<std::string> evaluated(metrics.begin(), metrics.end());
  if (metrics.contains("ci")) {
    evaluated.emplace_back("ca");
    evaluated.emplace_back("cf");
  }
  mark_undefined(card, evaluated);

  for (auto& a : audit) {
    a["run_id"] = run_id;
    a["task_id"] = task.task_id;
  }
  write_jsonl(audit_path(c, task.task_id), audit);
  write_file_atomic(scorecard_path(c, task.task_id), to_json(card).dump(2) + "\n");
  outcome.ok = true;
  outcome.outputs = {scorecard_path(c, task.task_id), audit_path(c, task.task_id)};
  return outcome;
}

}  // namespace

std::vector<TaskSpec> load_tasks(const fs::path& file) {
  const auto body = read_file(file);
  if (file.extension() != ".json") {
    const auto query = std::string(text::trim(body));
    if (query.empty()) throw Error(Errc::EmptyInput, file.string() + " holds no query");
    return {{file.stem().string(), query, std::nullopt}};
  }
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::FormatError, file.string() + ": " + e.what());
  }
  if (j.value("version", 0) != 1) throw Error(Errc::SchemaVersionMismatch, file.string() + ": expected version 1");
  std::vector<TaskSpec> tasks;
  std::set<std::string> ids;
  try {
    for (const auto& t : j.at("tasks")) {
      TaskSpec spec{t.at("task_id").get<std::string>(), t.at("query").get<std::string>(), std::nullopt};
      if (t.contains("report")) spec.report = file.parent_path() / t["report"].get<std::string>();
      if (spec.task_id.empty() || spec.task_id.find_first_of("/\\") != std::string::npos) {
        throw Error(Errc::FormatError, file.string() + ": invalid task_id \"" + spec.task_id + "\"");
      }
      if (!ids.insert(spec.task_id).second) {
        throw Error(Errc::FormatError, file.string() + ": duplicate task_id " + spec.task_id);
      }
      tasks.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::FormatError, file.string() + ": " + e.what());
  }
  return tasks;
}

fs::path protocol_path(const RunConfig& c, std::string_view task_id) {
  return c.protocol_dir / (std::string(task_id) + ".protocol.json");
}
fs::path scorecard_path(const RunConfig& c, std::string_view task_id) {
  return c.results_dir / (std::string(task_id) + ".scorecard.json");
}
fs::path audit_path(const RunConfig& c, std::string_view task_id) {
  return c.results_dir / (std::string(task_id) + ".audit.jsonl");
}

ProtocolOptions protocol_options(const RunConfig& c) {
  ProtocolOptions p;
  p.today = c.effective_today();
  p.min_kic = c.min_kic;
  p.max_kic = c.max_kic;
  p.min_rq = c.min_rq;
  p.max_rq = c.max_rq;
  p.step_budget = c.protocol_step_budget;
  p.search_results = c.results_per_query;
  return p;
}

WorkflowOptions workflow_options(const RunConfig& c) {
  WorkflowOptions w;
  w.today = c.effective_today();
  w.max_claims = c.max_claims;
  w.queries_per_claim = c.queries_per_claim;
  w.results_per_query = c.results_per_query;
  w.fetches_per_claim = c.fetches_per_claim;
  w.workers = c.item_workers;
  return w;
}

std::string make_run_id(std::string_view command, const json& config, const json& inputs) {
  return sha256_hex(std::string(command) + "\n" + config.dump() + "\n" + inputs.dump()).substr(0, 16);
}

std::set<std::string> parse_metric_filter(std::string_view csv) {
  std::set<std::string> out;
  std::string item;
  std::istringstream in{std::string(csv)};
  while (std::getline(in, item, ',')) {
    const auto name = text::to_lower(text::trim(item));
    if (name.empty()) continue;
    if (!kAllMetrics.contains(name)) throw Error(Errc::ConfigError, "unknown metric \"" + name + "\"");
    out.insert(name);
  }
  if (out.empty()) throw Error(Errc::ConfigError, "metric filter selects nothing");
  return out;
}

CommandResult cmd_protocol_create(const AppContext& ctx, const fs::path& tasks_file) {
  const auto started = now_timestamp_utc();
  const auto& c = ctx.config;
  std::vector<TaskSpec> tasks;
  try {
    validate(ctx);
    if (c.cutoff_date) {
      throw Error(Errc::ConfigError, "a cutoff date cannot apply to protocol creation, which needs current evidence");
    }
    tasks = load_tasks(tasks_file);
  } catch (const Error& e) {
    return fatal(e.what());
  }
  const std::string command = "protocol-create";
  const json inputs{{"tasks", digest_entry(tasks_file)}, {"corpus", corpus_digest(ctx)}};
  CommandResult result;
  result.run_id = make_run_id(command, to_json(c), inputs);

  Runtime rt;
  try {
    rt = make_runtime(ctx, std::nullopt, "protocol");
  } catch (const Error& e) {
    return fatal(e.what());
  }
  const auto popts = protocol_options(c);

  auto outcomes = parallel_map(tasks.size(), c.workers, [&](std::size_t i) -> TaskOutcome {
    const auto& t = tasks[i];
    try {
      auto p = create_protocol(*rt.gateway, *rt.evidence, t.task_id, t.query, popts);
      p.run_id = result.run_id;
      save_protocol(p, protocol_path(c, t.task_id));
      spdlog::info("protocol {}: {} checklist items, {} questions", t.task_id, p.kic_items.size(), p.rq_items.size());
      return {true, {protocol_path(c, t.task_id)}, ""};
    } catch (const Error& e) {
      spdlog::error("protocol {} failed: {}", t.task_id, e.what());
      return {false, {}, t.task_id + ": " + e.what()};
    }
  });
  std::size_t ok = 0;
  for (auto& o : outcomes) {
    ok += o.ok ? 1 : 0;
    result.outputs.insert(result.outputs.end(), o.outputs.begin(), o.outputs.end());
    if (!o.ok) result.errors.push_back(o.error);
  }
  result.exit_code = exit_for(ok, tasks.size());
  write_manifest(ctx, result.run_id, command, inputs, started, result);
  return result;
}

CommandResult cmd_evaluate(const AppContext& ctx, const fs::path& tasks_file, const std::set<std::string>& metrics) {
  const auto started = now_timestamp_utc();
  const auto& c = ctx.config;
  std::vector<TaskSpec> tasks;
  json inputs{{"tasks", digest_entry(tasks_file)}, {"corpus", nullptr}, {"reports", json::array()},
              {"protocols", json::array()}};
  try {
    validate(ctx);
    for (const auto& m : metrics) {
      if (!kAllMetrics.contains(m)) throw Error(Errc::ConfigError, "unknown metric \"" + m + "\"");
    }
    if (metrics.empty()) throw Error(Errc::ConfigError, "no metrics selected");
    tasks = load_tasks(tasks_file);
    const bool adaptive = metrics.contains("kic") || metrics.contains("rq");
    for (const auto& t : tasks) {
      if (!t.report) throw Error(Errc::FormatError, "task " + t.task_id + " names no report file");
      inputs["reports"].push_back(digest_entry(*t.report));
      if (!adaptive) continue;
      const auto p = protocol_path(c, t.task_id);
      if (!fs::exists(p)) {
        throw Error(Errc::MissingProtocol, "task " + t.task_id + " needs " + p.string() + " for kic/rq; run protocol-create first");
      }
      inputs["protocols"].push_back(digest_entry(p));
    }
    inputs["corpus"] = corpus_digest(ctx);
  } catch (const Error& e) {
    return fatal(e.what());
  }
  const std::string command = "evaluate --metrics " + metric_list(metrics);
  CommandResult result;
  result.run_id = make_run_id(command, to_json(c), inputs);

  Runtime rt;
  try {
    rt = make_runtime(ctx, c.cutoff_date, "evaluate");
  } catch (const Error& e) {
    return fatal(e.what());
  }
  auto outcomes = parallel_map(tasks.size(), c.workers, [&](std::size_t i) -> TaskOutcome {
    try {
      return evaluate_task(ctx, rt, tasks[i], metrics, result.run_id);
    } catch (const Error& e) {
      spdlog::error("task {} failed: {}", tasks[i].task_id, e.what());
      return {false, {}, tasks[i].task_id + ": " + e.what()};
    }
  });
  std::size_t ok = 0;
  for (auto& o : outcomes) {
    ok += o.ok ? 1 : 0;
    result.outputs.insert(result.outputs.end(), o.outputs.begin(), o.outputs.end());
    if (!o.ok) result.errors.push_back(o.error);
  }
  result.exit_code = exit_for(ok, tasks.size());
  write_manifest(ctx, result.run_id, command, inputs, started, result);
  return result;
}

CommandResult cmd_score(const AppContext& ctx, const fs::path& scorecard_dir) {
  const auto started = now_timestamp_utc();
  std::vector<Scorecard> cards;
  json inputs = json::array();
  try {
    for (const auto& f : scorecard_files(scorecard_dir)) {
      cards.push_back(load_scorecard(f));
      inputs.push_back(digest_entry(f));
    }
    CommandResult result;
    result.run_id = make_run_id("score", json::object(), inputs);
    const auto agg = aggregate(cards);
    if (ctx.out) *ctx.out << format_table(cards, agg);
    const auto out = ctx.config.results_dir / "aggregate.json";
    write_file_atomic(out, aggregate_to_json(agg, result.run_id).dump(2) + "\n");
    result.outputs.push_back(out);
    write_manifest(ctx, result.run_id, "score", inputs, started, result);
    return result;
  } catch (const Error& e) {
    return fatal(e.what());
  }
}

CommandResult cmd_sweep(const AppContext& ctx, const SweepArgs& args) {
  const auto started = now_timestamp_utc();
  try {
    const auto pairs = load_pairs(args.pair_file);
    const auto grid = args.grid.empty() ? default_grid(args.n) : args.grid;
    json config{{"n", args.n},
                {"verifier", args.oracle ? "oracle" : "pipeline"},
                {"aligner", "constructed"},
                {"seed", args.seed ? json(*args.seed) : json(nullptr)},
                {"pairs", args.pair_file.filename().string()}};
    json inputs{{"pairs", digest_entry(args.pair_file)}};
    if (!args.oracle) inputs["corpus"] = corpus_digest(ctx);
    CommandResult result;
    result.run_id = make_run_id("sweep", {{"sweep", config}, {"grid", grid}}, inputs);
    config["run_id"] = result.run_id;

    OracleVerifier oracle;
    ConstructedAligner aligner;
    std::optional<Runtime> rt;
    std::unique_ptr<PipelineVerifier> pipeline;
    if (!args.oracle) {
      validate(ctx);
      rt = make_runtime(ctx, ctx.config.cutoff_date, "sweep");
      pipeline = std::make_unique<PipelineVerifier>(*rt->gateway, *rt->evidence, workflow_options(ctx.config));
    }
    ClaimVerifier& verifier = args.oracle ? static_cast<ClaimVerifier&>(oracle) : *pipeline;
    const auto curve = run_sweep(pairs, grid, args.n, verifier, aligner, args.seed);

    const auto dir = ctx.config.results_dir;
    write_file_atomic(dir / "sweep.json", sweep_to_json(curve, config).dump(2) + "\n");
    std::string csv = to_csv(curve);
    // Tag every row so the CSV stays attributable on its own.
    std::istringstream lines(csv);
    std::string line, tagged;
    bool header = true;
    while (std::getline(lines, line)) {
      tagged += line + "," + (header ? std::string("run_id") : result.run_id) + "\n";
      header = false;
    }
    write_file_atomic(dir / "sweep.csv", tagged);
    result.outputs = {dir / "sweep.json", dir / "sweep.csv"};
    for (const auto& p : curve.points) {
      if (p.error) {
        result.errors.push_back("r=" + std::to_string(p.r) + ": " + *p.error);
        result.exit_code = kExitPartial;
      }
    }
    if (ctx.out) {
      *ctx.out << "r        k   factuality  alignment\n";
      for (const auto& p : curve.points) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-8.4f %-3zu %-11s %s\n", p.r, p.k, format_percent(p.factuality).c_str(),
                      format_percent(p.alignment).c_str());
        *ctx.out << buf;
      }
    }
    write_manifest(ctx, result.run_id, "sweep", inputs, started, result);
    return result;
  } catch (const Error& e) {
    return fatal(e.what());
  }
}

CommandResult cmd_inspect(const fs::path& artifact, std::ostream& out) {
  try {
    const auto body = read_file(artifact);
    const auto name = artifact.filename().string();
    if (name.ends_with(".jsonl")) {
      std::istringstream lines(body);
      std::string line;
      while (std::getline(lines, line)) {
        if (!text::trim(line).empty()) out << json::parse(line).dump(2) << "\n";
      }
      return {};
    }
    if (artifact.extension() == ".md") {
      const auto report = parse_report(body, artifact.stem().string(), "");
      const auto stats = report_stats(report);
      out << "words: " << stats.word_count << "\nsections: " << stats.section_count
          << "\ncitations: " << stats.citation_count << "\nsentences: " << report.sentences.size() << "\n";
      for (const auto& c : report.citations) out << "  " << c.url << "\n";
      for (const auto& d : report.diagnostics) out << "note: " << d << "\n";
      return {};
    }
    const auto j = json::parse(body);
    if (j.is_object() && j.contains("kic_items")) {
      const auto p = protocol_from_json(j);
      out << "task: " << p.task_id << "\nquery: " << p.query << "\ncreated: " << p.created_at << "\ntools:";
      for (const auto& t : p.tools_selected) out << " " << t;
      out << "\nchecklist (" << p.kic_items.size() << "):\n";
      for (const auto& k : p.kic_items) out << "  - " << k.question << "\n";
      out << "reasoning questions (" << p.rq_items.size() << "):\n";
      for (const auto& r : p.rq_items) out << "  - " << r.question << "\n";
      return {};
    }
    if (j.is_object() && j.contains("scores") && j.contains("task_id")) {
      const auto card = scorecard_from_json(j);
      out << format_table({card}, aggregate(std::vector<Scorecard>{card}));
      for (const auto& n : card.diagnostics.notes) out << "note: " << n << "\n";
      return {};
    }
    out << j.dump(2) << "\n";
    return {};
  } catch (const json::exception& e) {
    return fatal(artifact.string() + ": " + e.what());
  } catch (const Error& e) {
    return fatal(e.what());
  }
}

}  // namespace dreval
