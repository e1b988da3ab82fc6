#include "dreval/results.hpp"

#include <algorithm>
#include <sstream>

#include "dreval/error.hpp"
#include "dreval/io.hpp"

namespace dreval {
namespace {

json score_json(const Score& s) { return s ? json(*s) : json(nullptr); }

Score score_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

json to_json(const Scorecard& s) {
  json scores = json::object();
  for (auto name : kScorecardMetrics) scores[std::string(name)] = score_json(metric(s, name));
  json diag{{"undefined_metrics", s.diagnostics.undefined_metrics},
            {"unverifiable_fraction", score_json(s.diagnostics.unverifiable_fraction)},
            {"excluded_counts", s.diagnostics.excluded_counts},
            {"notes", s.diagnostics.notes}};
  return {{"version", kScorecardVersion},
          {"run_id", s.run_id},
          {"task_id", s.task_id},
          {"scores", scores},
          {"diagnostics", diag}};
}

Scorecard scorecard_from_json(const json& j) {
  if (!j.is_object() || !j.contains("version")) throw Error(Errc::CorruptFile, "scorecard has no version");
  if (j["version"] != kScorecardVersion) {
    throw Error(Errc::SchemaVersionMismatch, "scorecard version " + j["version"].dump() + " is not supported");
  }
  try {
    Scorecard s;
    s.task_id = j.at("task_id").get<std::string>();
    s.run_id = j.value("run_id", std::string());
    const auto& scores = j.at("scores");
    for (auto name : kScorecardMetrics) {
      const std::string key(name);
      metric(s, name) = scores.contains(key) ? score_from(scores[key]) : std::nullopt;
    }
    if (j.contains("diagnostics")) {
      const auto& d = j["diagnostics"];
      s.diagnostics.undefined_metrics = d.value("undefined_metrics", std::vector<std::string>{});
      if (d.contains("unverifiable_fraction")) s.diagnostics.unverifiable_fraction = score_from(d["unverifiable_fraction"]);
      s.diagnostics.excluded_counts = d.value("excluded_counts", std::map<std::string, std::int64_t>{});
      s.diagnostics.notes = d.value("notes", std::vector<std::string>{});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::CorruptFile, std::string("scorecard: ") + e.what());
  }
}

Scorecard load_scorecard(const std::filesystem::path& file) {
  try {
    return scorecard_from_json(json::parse(read_file(file)));
  } catch (const json::parse_error& e) {
    throw Error(Errc::CorruptFile, file.string() + ": " + e.what());
  }
}

std::vector<std::filesystem::path> scorecard_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.ends_with(".scorecard.json")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

json aggregate_to_json(const AggregateScorecard& a, const std::string& run_id) {
  json scores = json::object();
  for (auto name : kScorecardMetrics) {
    auto it = a.scores.find(std::string(name));
    scores[std::string(name)] = it == a.scores.end() ? json(nullptr) : score_json(it->second);
  }
  return {{"version", kScorecardVersion},
          {"run_id", run_id},
          {"task_count", a.task_count},
          {"scores", scores},
          {"excluded_counts", a.excluded_counts},
          {"notes", a.notes}};
}

std::string format_table(const std::vector<Scorecard>& tasks, const AggregateScorecard& aggregate) {
  constexpr int kNameWidth = 20;
  constexpr int kCellWidth = 11;
  std::ostringstream out;
  auto cell = [&](const std::string& s) {
    out << std::string(kCellWidth - std::min<int>(kCellWidth - 1, static_cast<int>(s.size())), ' ') << s;
  };
  auto name = [&](std::string s) {
    if (s.size() > kNameWidth) s = s.substr(0, kNameWidth - 1) + "~";
    out << s << std::string(kNameWidth - s.size(), ' ');
  };
  name("task");
  for (auto m : kScorecardMetrics) cell(std::string(m));
  out << "\n";
  for (const auto& t : tasks) {
    name(t.task_id);
    for (auto m : kScorecardMetrics) cell(format_percent(metric(t, m)));
    out << "\n";
  }
  name("Aggregate");
  for (auto m : kScorecardMetrics) {
    auto it = aggregate.scores.find(std::string(m));
    cell(format_percent(it == aggregate.scores.end() ? std::nullopt : it->second));
  }
  out << "\n";
  return out.str();
}

}  // namespace dreval
