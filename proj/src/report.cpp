#include "dreval/report.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <regex>

#include "dreval/error.hpp"
#include "dreval/text.hpp"
#include "dreval/url.hpp"

namespace dreval {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || static_cast<unsigned char>(c) >= 0x80; }

enum class LineKind { Blank, Heading, RefDef, Fence, Code, Html, ListItem, Text };

struct Line {
  std::size_t begin = 0;
  std::size_t end = 0;  // excludes '\n'
  LineKind kind = LineKind::Text;
  std::size_t content = 0;  // first content byte (after heading/list marker)
  int heading_level = 0;
};

struct Block {
  Span span;
  std::size_t section = 0;
  bool scannable = true;   // links are collected
  bool prose = true;       // sentences are split
};

struct RefDef {
  std::string url;
  Span url_span;
};

const std::regex& heading_re() {
  static const std::regex re(R"(^ {0,3}(#{1,6})(?:[ \t]+|$))");
  return re;
}
const std::regex& refdef_re() {
  static const std::regex re(R"(^ {0,3}\[([^\]]+)\]:[ \t]*<?([^\s>]+)>?.*$)");
  return re;
}
const std::regex& list_re() {
  static const std::regex re(R"(^[ \t]*(?:[-*+]|\d{1,9}[.)])[ \t]+)");
  return re;
}

bool is_fence(std::string_view line) {
  auto t = line;
  std::size_t indent = 0;
  while (!t.empty() && t.front() == ' ' && indent < 4) {
    t.remove_prefix(1);
    ++indent;
  }
  return indent < 4 && (t.starts_with("```") || t.starts_with("~~~"));
}

bool is_html_start(std::string_view line) {
  auto t = text::trim(line);
  if (t.size() < 2 || t.front() != '<') return false;
  if (text::starts_with_icase(t, "<http://") || text::starts_with_icase(t, "<https://")) return false;
  const char c = t[1];
  return std::isalpha(static_cast<unsigned char>(c)) || c == '/' || c == '!';
}

std::string normalize_label(std::string_view label) { return text::to_lower(text::squash_whitespace(label)); }

bool is_abbreviation_before(std::string_view body, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && std::isalpha(static_cast<unsigned char>(body[b - 1]))) --b;
  const auto word = text::to_lower(body.substr(b, dot - b));
  if (word.size() == 1) return true;
  static constexpr std::array kAbbrev = {"e.g", "i.e", "vs", "dr", "mr", "mrs", "ms", "prof", "inc",
                                         "ltd", "jr", "sr", "st", "no", "fig", "approx", "al", "cf"};
  return std::find(kAbbrev.begin(), kAbbrev.end(), word) != kAbbrev.end();
}

class Parser {
 public:
  explicit Parser(std::string_view body) : body_(body) {}

  void run(Report& report) {
    split_lines();
    collect_definitions();
    build_blocks(report);
    for (const auto& block : blocks_) {
      if (block.scannable) scan_links(block, report);
    }
    std::sort(protected_.begin(), protected_.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
    for (const auto& block : blocks_) {
      if (block.prose) split_sentences(block, report);
    }
    attach_links(report);
  }

  std::vector<Span> definition_lines() const { return def_lines_; }
  std::vector<Span> url_spans() const { return url_spans_; }

 private:
  void split_lines() {
    std::size_t pos = 0;
    bool in_fence = false;
    while (pos <= body_.size()) {
      auto eol = body_.find('\n', pos);
      if (eol == std::string_view::npos) eol = body_.size();
      Line line{pos, eol, LineKind::Text, pos, 0};
      const auto view = body_.substr(pos, eol - pos);
      std::cmatch m;
      if (is_fence(view)) {
        line.kind = LineKind::Fence;
        in_fence = !in_fence;
      } else if (in_fence) {
        line.kind = LineKind::Code;
      } else if (text::trim(view).empty()) {
        line.kind = LineKind::Blank;
      } else if (std::regex_search(view.data(), view.data() + view.size(), m, heading_re())) {
        line.kind = LineKind::Heading;
        line.heading_level = static_cast<int>(m[1].length());
        line.content = pos + static_cast<std::size_t>(m[0].length());
      } else if (std::regex_match(view.data(), view.data() + view.size(), m, refdef_re())) {
        line.kind = LineKind::RefDef;
      } else if (is_html_start(view)) {
        line.kind = LineKind::Html;
      } else if (std::regex_search(view.data(), view.data() + view.size(), m, list_re())) {
        line.kind = LineKind::ListItem;
        line.content = pos + static_cast<std::size_t>(m[0].length());
      }
      lines_.push_back(line);
      if (eol == body_.size()) break;
      pos = eol + 1;
    }
  }

  void collect_definitions() {
    for (const auto& line : lines_) {
      if (line.kind != LineKind::RefDef) continue;
      const auto view = body_.substr(line.begin, line.end - line.begin);
      std::cmatch m;
      std::regex_match(view.data(), view.data() + view.size(), m, refdef_re());
      const auto label = normalize_label(m[1].str());
      const auto url_begin = line.begin + static_cast<std::size_t>(m.position(2));
      RefDef def{m[2].str(), Span{url_begin, url_begin + static_cast<std::size_t>(m[2].length())}};
      defs_.try_emplace(label, def);
      def_lines_.push_back(Span{line.begin, line.end});
      if (parse_url(def.url)) url_spans_.push_back(def.url_span);
    }
  }

  void build_blocks(Report& report) {
    Section current;
    bool have_section = false;
    std::optional<Block> open;
    bool open_html = false;

    auto close_block = [&] {
      if (!open) return;
      auto& section = current;
      section.paragraphs.push_back(text::squash_whitespace(body_.substr(open->span.begin, open->span.size())));
      blocks_.push_back(*open);
      open.reset();
    };
    auto flush_section = [&] {
      close_block();
      if (have_section) report.sections.push_back(std::move(current));
      current = Section{};
      have_section = false;
    };

    for (const auto& line : lines_) {
      switch (line.kind) {
        case LineKind::Blank:
          close_block();
          open_html = false;
          break;
        case LineKind::Heading: {
          flush_section();
          const auto heading = text::trim(body_.substr(line.content, line.end - line.content));
          // Closing hashes are decoration.
          auto h = std::string(heading);
          while (!h.empty() && h.back() == '#') h.pop_back();
          current.heading = std::string(text::trim(h));
          current.level = line.heading_level;
          have_section = true;
          Block hb{Span{line.content, line.end}, report.sections.size(), true, false};
          blocks_.push_back(hb);
          break;
        }
        case LineKind::RefDef:
          close_block();
          break;
        case LineKind::Fence:
        case LineKind::Code:
        case LineKind::Html: {
          const bool opaque = true;
          if (line.kind == LineKind::Html) open_html = true;
          if (open && (open->scannable || open->prose)) close_block();
          have_section = true;
          if (!open) open = Block{Span{line.begin, line.end}, report.sections.size(), !opaque, !opaque};
          open->span.end = line.end;
          break;
        }
        case LineKind::ListItem:
          if (open_html) {
            open->span.end = line.end;
            break;
          }
          close_block();
          have_section = true;
          open = Block{Span{line.content, line.end}, report.sections.size(), true, true};
          break;
        case LineKind::Text:
          have_section = true;
          if (open_html && open) {
            open->span.end = line.end;
            break;
          }
          if (open && !open->prose) close_block();
          if (!open) open = Block{Span{line.begin, line.end}, report.sections.size(), true, true};
          open->span.end = line.end;
          break;
      }
    }
    flush_section();
  }

  void add_link(Report& report, std::string url, Span url_span, CitationLink::Kind kind, std::size_t usage) {
    CitationLink link;
    link.url = std::move(url);
    link.anchor_span = url_span;
    link.kind = kind;
    link.usage_offset = usage;
    report.citations.push_back(std::move(link));
  }

  // Returns the index one past the matching ']' or npos.
  std::size_t match_bracket(std::size_t open, std::size_t end) const {
    int depth = 0;
    for (std::size_t i = open; i < end; ++i) {
      if (body_[i] == '\\') {
        ++i;
        continue;
      }
      if (body_[i] == '[') ++depth;
      if (body_[i] == ']' && --depth == 0) return i + 1;
    }
    return std::string_view::npos;
  }

  // Parses "(dest "title")" starting at '('; returns dest span and one past ')'.
  std::optional<std::pair<Span, std::size_t>> parse_destination(std::size_t open, std::size_t end) const {
    std::size_t i = open + 1;
    while (i < end && is_space(body_[i])) ++i;
    Span dest{i, i};
    if (i < end && body_[i] == '<') {
      const auto close = body_.find('>', i);
      if (close == std::string_view::npos || close >= end) return std::nullopt;
      dest = Span{i + 1, close};
      i = close + 1;
    } else {
      int parens = 0;
      while (i < end && !is_space(body_[i])) {
        if (body_[i] == '(') ++parens;
        if (body_[i] == ')') {
          if (parens == 0) break;
          --parens;
        }
        ++i;
      }
      dest.end = i;
    }
    while (i < end && is_space(body_[i])) ++i;
    if (i < end && (body_[i] == '"' || body_[i] == '\'')) {
      const char q = body_[i];
      const auto close = body_.find(q, i + 1);
      if (close == std::string_view::npos || close >= end) return std::nullopt;
      i = close + 1;
      while (i < end && is_space(body_[i])) ++i;
    }
    if (i >= end || body_[i] != ')') return std::nullopt;
    return std::make_pair(dest, i + 1);
  }

  std::size_t bare_url_end(std::size_t start, std::size_t end) const {
    std::size_t i = start;
    int parens = 0;
    while (i < end) {
      const char c = body_[i];
      if (is_space(c) || c == '<' || c == '>' || c == '"' || c == '`') break;
      if (c == '(') ++parens;
      if (c == ')') {
        if (parens == 0) break;
        --parens;
      }
      if (c == ']' || c == '[') break;
      ++i;
    }
    while (i > start && std::string_view(".,;:!?'*_").find(body_[i - 1]) != std::string_view::npos) --i;
    return i;
  }

  void scan_links(const Block& block, Report& report) {
    const std::size_t end = block.span.end;
    std::size_t i = block.span.begin;
    while (i < end) {
      const char c = body_[i];
      if (c == '\\') {
        i += 2;
        continue;
      }
      if (c == '`') {
        std::size_t run = 0;
        while (i + run < end && body_[i + run] == '`') ++run;
        const auto close = body_.find(std::string(run, '`'), i + run);
        i = (close == std::string_view::npos || close >= end) ? i + run : close + run;
        continue;
      }
      const bool image = c == '!' && i + 1 < end && body_[i + 1] == '[';
      if (c == '[' || image) {
        const std::size_t open = image ? i + 1 : i;
        const auto after = match_bracket(open, end);
        if (after != std::string_view::npos) {
          if (after < end && body_[after] == '(') {
            if (auto dest = parse_destination(after, end)) {
              const auto [dspan, close] = *dest;
              const std::string url(body_.substr(dspan.begin, dspan.size()));
              protected_.push_back(Span{i, close});
              if (image) {
                report.diagnostics.push_back("image ignored: " + url);
              } else if (parse_url(url)) {
                add_link(report, url, dspan, CitationLink::Kind::Inline, dspan.begin);
                url_spans_.push_back(dspan);
              } else {
                report.diagnostics.push_back("non-absolute link ignored: " + url);
              }
              i = close;
              continue;
            }
          }
          const auto text_label = normalize_label(body_.substr(open + 1, after - open - 2));
          std::string label = text_label;
          std::size_t construct_end = after;
          if (after < end && body_[after] == '[') {
            const auto label_end = match_bracket(after, end);
            if (label_end != std::string_view::npos) {
              const auto explicit_label = normalize_label(body_.substr(after + 1, label_end - after - 2));
              if (!explicit_label.empty()) label = explicit_label;
              construct_end = label_end;
            }
          }
          if (!image) {
            if (const auto def = defs_.find(label); def != defs_.end()) {
              protected_.push_back(Span{i, construct_end});
              if (parse_url(def->second.url)) {
                add_link(report, def->second.url, def->second.url_span, CitationLink::Kind::Reference, i);
              } else {
                report.diagnostics.push_back("non-absolute reference ignored: " + def->second.url);
              }
              i = construct_end;
              continue;
            }
            if (!label.empty() && std::all_of(label.begin(), label.end(), [](unsigned char ch) {
                  return std::isdigit(ch) || ch == ',' || ch == ' ' || ch == '-';
                })) {
              report.diagnostics.push_back("unsupported citation syntax: [" + label + "]");
            }
          }
        }
        ++i;
        continue;
      }
      if ((c == 'h' || c == 'H') && (i == block.span.begin || !is_alnum(body_[i - 1])) &&
          (text::starts_with_icase(body_.substr(i), "http://") || text::starts_with_icase(body_.substr(i), "https://"))) {
        const auto stop = bare_url_end(i, end);
        const std::string url(body_.substr(i, stop - i));
        if (parse_url(url)) {
          add_link(report, url, Span{i, stop}, CitationLink::Kind::Bare, i);
          protected_.push_back(Span{i, stop});
          url_spans_.push_back(Span{i, stop});
          i = stop;
          continue;
        }
      }
      ++i;
    }
  }

  std::optional<Span> protected_at(std::size_t pos) const {
    auto it = std::upper_bound(protected_.begin(), protected_.end(), pos,
                               [](std::size_t p, const Span& s) { return p < s.begin; });
    while (it != protected_.begin()) {
      --it;
      if (it->contains(pos)) return *it;
      if (it->end <= pos && it->begin + 4096 < pos) break;
    }
    return std::nullopt;
  }

  void emit_sentence(std::size_t begin, std::size_t end, const Block& block, Report& report) {
    while (begin < end && is_space(body_[begin])) ++begin;
    while (end > begin && is_space(body_[end - 1])) --end;
    if (begin >= end) return;
    Sentence s;
    s.span = Span{begin, end};
    s.text = text::squash_whitespace(body_.substr(begin, end - begin));
    s.section = block.section;
    bool has_content = false;
    for (std::size_t i = begin; i < end && !has_content; ++i) {
      if (auto p = protected_at(i)) {
        i = p->end - 1;
        continue;
      }
      has_content = is_alnum(body_[i]);
    }
    s.link_only = !has_content;
    report.sentences.push_back(std::move(s));
  }

  void split_sentences(const Block& block, Report& report) {
    const std::size_t end = block.span.end;
    std::size_t start = block.span.begin;
    std::size_t i = start;
    while (i < end) {
      if (auto p = protected_at(i)) {
        i = std::max(p->end, i + 1);
        continue;
      }
      const char c = body_[i];
      if (c == '.' || c == '!' || c == '?') {
        std::size_t j = i + 1;
        while (j < end && (body_[j] == '.' || body_[j] == '!' || body_[j] == '?')) ++j;
        while (j < end && std::string_view("\"')]*_").find(body_[j]) != std::string_view::npos) ++j;
        if (j >= end || is_space(body_[j])) {
          std::size_t k = j;
          while (k < end && is_space(body_[k])) ++k;
          const bool abbreviation = c == '.' && j == i + 1 && is_abbreviation_before(body_, i);
          const bool lower_next = k < end && std::islower(static_cast<unsigned char>(body_[k]));
          if (!abbreviation && !lower_next) {
            emit_sentence(start, j, block, report);
            start = k;
            i = k;
            continue;
          }
        }
        i = j;
        continue;
      }
      ++i;
    }
    emit_sentence(start, end, block, report);
  }

  void attach_links(Report& report) {
    for (auto& link : report.citations) {
      for (std::size_t s = 0; s < report.sentences.size(); ++s) {
        const auto& span = report.sentences[s].span;
        if (link.usage_offset >= span.begin && link.usage_offset < span.end) {
          link.sentence = s;
          link.context = report.sentences[s].text;
          break;
        }
      }
      if (!link.sentence) {
        // Heading or opaque block: use the enclosing line as context.
        auto b = body_.rfind('\n', link.usage_offset);
        b = b == std::string_view::npos ? 0 : b + 1;
        auto e = body_.find('\n', link.usage_offset);
        if (e == std::string_view::npos) e = body_.size();
        link.context = text::squash_whitespace(body_.substr(b, e - b));
      }
    }
    std::stable_sort(report.citations.begin(), report.citations.end(),
                     [](const CitationLink& a, const CitationLink& b) { return a.usage_offset < b.usage_offset; });
  }

  std::string_view body_;
  std::vector<Line> lines_;
  std::vector<Block> blocks_;
  std::map<std::string, RefDef> defs_;
  std::vector<Span> protected_;
  std::vector<Span> def_lines_;
  std::vector<Span> url_spans_;
};

}  // namespace

Report parse_report(std::string_view markdown, std::string task_id, std::string query) {
  if (text::trim(markdown).empty()) throw Error(Errc::EmptyInput, "report markdown is blank");
  Report report;
  report.task_id = std::move(task_id);
  report.query = std::move(query);
  report.body = std::string(markdown);
  Parser parser(report.body);
  parser.run(report);
  return report;
}

ReportStats report_stats(const Report& report) {
  // Re-derive URL and definition spans; the parse result only keeps citations.
  Report scratch;
  scratch.body = report.body;
  Parser parser(scratch.body);
  parser.run(scratch);

  std::string masked = report.body;
  auto blank = [&](Span s) { std::fill(masked.begin() + s.begin, masked.begin() + s.end, ' '); };
  for (const auto& s : parser.url_spans()) blank(s);
  for (const auto& s : parser.definition_lines()) blank(s);

  ReportStats stats;
  std::size_t i = 0;
  while (i < masked.size()) {
    while (i < masked.size() && is_space(masked[i])) ++i;
    bool has_alnum = false;
    while (i < masked.size() && !is_space(masked[i])) has_alnum |= is_alnum(masked[i++]);
    if (has_alnum) ++stats.word_count;
  }
  stats.section_count = report.sections.size();
  stats.citation_count = report.citations.size();
  return stats;
}

}  // namespace dreval
