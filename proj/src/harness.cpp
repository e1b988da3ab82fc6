#include "dreval/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "dreval/error.hpp"
#include "dreval/io.hpp"

namespace dreval {
namespace {

// Line on which each top-level array element starts.
std::vector<std::size_t> element_lines(std::string_view text) {
  std::vector<std::size_t> lines;
  std::size_t line = 1;
  int depth = 0;
  bool in_string = false;
  bool expect_element = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') ++line;
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (depth == 1 && expect_element && c != ']') {
      lines.push_back(line);
      expect_element = false;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '[':
      case '{':
        if (++depth == 1) expect_element = true;
        break;
      case ']':
      case '}':
        --depth;
        break;
      case ',':
        if (depth == 1) expect_element = true;
        break;
      default:
        break;
    }
  }
  return lines;
}

std::size_t line_of_byte(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

ClaimVariant variant(const json& j, const char* key) {
  const auto& v = j.at(key);
  return {v.at("claim").get<std::string>(), v.at("url").get<std::string>()};
}

}  // namespace

std::vector<ClaimPair> parse_pairs(std::string_view text, std::string_view source) {
  const std::string where(source);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::FormatError,
                where + ":" + std::to_string(line_of_byte(text, e.byte == 0 ? 0 : e.byte - 1)) + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(Errc::FormatError, where + ":1: expected a JSON array of pairs");
  const auto lines = element_lines(text);
  std::vector<ClaimPair> pairs;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto line = i < lines.size() ? lines[i] : 1;
    try {
      const auto& j = doc[i];
      ClaimPair p{j.at("id").get<int>(), j.at("topic").get<std::string>(), variant(j, "true"), variant(j, "false")};
      if (p.truth.url.empty() || p.falsehood.url.empty()) throw Error(Errc::FormatError, "empty citation url");
      pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(Errc::FormatError, where + ":" + std::to_string(line) + ": pair " + std::to_string(i + 1) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::FormatError, where + ":" + std::to_string(line) + ": pair " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].id == pairs[i - 1].id) {
      throw Error(Errc::FormatError, where + ": duplicate pair id " + std::to_string(pairs[i].id));
    }
  }
  return pairs;
}

std::vector<ClaimPair> load_pairs(const std::filesystem::path& file) {
  return parse_pairs(read_file(file), file.string());
}

std::size_t corrupted_count(double r, std::size_t n) {
  // The epsilon absorbs representation error in grid values like 1/3.
  return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 0.5 + 1e-9));
}

std::vector<BatchClaim> build_batch(const std::vector<ClaimPair>& pairs, const CorruptionConfig& cfg) {
  if (!(cfg.r >= 0.0 && cfg.r <= 1.0)) throw Error(Errc::PreconditionViolation, "corruption rate outside [0,1]");
  if (cfg.n > pairs.size()) {
    throw Error(Errc::PreconditionViolation, "batch size " + std::to_string(cfg.n) + " exceeds " +
                                                 std::to_string(pairs.size()) + " available pairs");
  }
  std::vector<ClaimPair> chosen(pairs.begin(), pairs.end());
  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  chosen.resize(cfg.n);
  const auto k = corrupted_count(cfg.r, cfg.n);

  std::vector<std::size_t> order(cfg.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.seed) {
    std::mt19937_64 rng(*cfg.seed);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
  }
  std::vector<bool> corrupt(cfg.n, false);
  for (std::size_t i = 0; i < k; ++i) corrupt[order[i]] = true;

  std::vector<BatchClaim> batch;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const auto& p = chosen[i];
    const auto& v = corrupt[i] ? p.falsehood : p.truth;
    batch.push_back({p.id, p.topic, corrupt[i], v.claim, v.url});
  }
  return batch;
}

FactualityLabel OracleVerifier::verify(const BatchClaim& claim) {
  return claim.is_false ? FactualityLabel::Contradicted : FactualityLabel::Supported;
}

PipelineVerifier::PipelineVerifier(Gateway& gateway, EvidenceTools& evidence, WorkflowOptions options)
    : gateway_(gateway), evidence_(evidence), options_(std::move(options)) {}

FactualityLabel PipelineVerifier::verify(const BatchClaim& claim) {
  Claim c;
  c.text = claim.text;
  return verify_claim(gateway_, evidence_, c, options_).judgment.label;
}

FaithfulnessLabel ConstructedAligner::align(const BatchClaim&) { return FaithfulnessLabel::Supported; }

PipelineAligner::PipelineAligner(Gateway& gateway, EvidenceTools& evidence) : gateway_(gateway), evidence_(evidence) {}

FaithfulnessLabel PipelineAligner::align(const BatchClaim& claim) {
  Claim c;
  c.text = claim.text;
  c.cited_urls = {claim.url};
  return judge_citation_faithfulness(gateway_, c, evidence_.fetch(claim.url)).label;
}

std::vector<double> default_grid(std::size_t n) {
  std::vector<double> grid;
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
  return grid;
}

SweepCurve run_sweep(const std::vector<ClaimPair>& pairs, const std::vector<double>& grid, std::size_t n,
                     ClaimVerifier& verifier, ClaimAligner& aligner, std::optional<std::uint64_t> seed) {
  if (grid.empty()) throw Error(Errc::PreconditionViolation, "empty sweep grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw Error(Errc::PreconditionViolation, "grid value outside [0,1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(Errc::PreconditionViolation, "grid is not strictly increasing");
  }
  SweepCurve curve;
  for (const double r : grid) {
    SweepPoint point;
    point.r = r;
    try {
      const auto batch = build_batch(pairs, {r, n, seed});
      LabelCounts fact;
      LabelCounts align;
      for (const auto& c : batch) {
        point.k += c.is_false ? 1 : 0;
        fact.add(verifier.verify(c));
        align.add(aligner.align(c));
      }
      point.factuality = factuality_score(fact);
      point.alignment = cf_score(align);
    } catch (const Error& e) {
      point.error = e.what();
    }
    curve.points.push_back(std::move(point));
  }
  return curve;
}

json sweep_to_json(const SweepCurve& curve, const json& config) {
  auto score = [](const Score& s) { return s ? json(*s) : json(nullptr); };
  json grid = json::array(), fact = json::array(), align = json::array(), errors = json::array();
  for (const auto& p : curve.points) {
    grid.push_back(p.r);
    fact.push_back(score(p.factuality));
    align.push_back(score(p.alignment));
    errors.push_back(p.error ? json(*p.error) : json(nullptr));
  }
  return {{"grid", grid}, {"factuality", fact}, {"alignment", align}, {"errors", errors}, {"config", config}};
}

std::string to_csv(const SweepCurve& curve) {
  std::ostringstream out;
  out << "r,k,factuality,alignment\n";
  auto cell = [](const Score& s) { return s ? std::to_string(*s) : std::string(); };
  for (const auto& p : curve.points) {
    out << p.r << "," << p.k << "," << cell(p.factuality) << "," << cell(p.alignment) << "\n";
  }
  return out.str();
}

double relative_degradation(double rq_sound, double rq_malformed) {
  if (rq_sound <= 0.0) throw Error(Errc::DegenerateBaseline, "sound report scored 0; degradation is undefined");
  return (rq_sound - rq_malformed) / rq_sound;
}

PairComparison compare_pairs(Gateway& gateway, EvidenceTools& evidence, const Report& sound, const Report& malformed,
                             const Protocol& protocol, int step_budget, std::size_t workers) {
  if (sound.query != malformed.query || sound.query != protocol.query) {
    throw Error(Errc::PreconditionViolation, "matched reports and protocol must share one query");
  }
  PairComparison out;
  out.sound_run = evaluate_rq(gateway, evidence, sound, protocol, step_budget, workers);
  out.malformed_run = evaluate_rq(gateway, evidence, malformed, protocol, step_budget, workers);
  out.rq_sound = out.sound_run.score;
  out.rq_malformed = out.malformed_run.score;
  out.relative_degradation = relative_degradation(out.rq_sound, out.rq_malformed);
  return out;
}

std::vector<TemporalPoint> temporal_run(Gateway& gateway, const Protocol& protocol,
                                        std::vector<TemporalVariant> variants, std::size_t workers) {
  std::stable_sort(variants.begin(), variants.end(), [](const auto& a, const auto& b) {
    if (!a.knowledge_cutoff || !b.knowledge_cutoff) return !a.knowledge_cutoff && b.knowledge_cutoff;
    return *a.knowledge_cutoff > *b.knowledge_cutoff;
  });
  std::vector<TemporalPoint> out;
  for (auto& v : variants) {
    TemporalPoint p;
    p.label = v.label;
    p.knowledge_cutoff = v.knowledge_cutoff;
    p.run = evaluate_kic(gateway, v.report, protocol, workers);
    p.kic = kic_score(p.run.verdicts);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace dreval
