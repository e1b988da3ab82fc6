#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dreval/date.hpp"

namespace dreval {

/// Half-open byte range [begin, end) into Report::body.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t pos) const { return pos >= begin && pos < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct CitationLink {
  enum class Kind { Inline, Bare, Reference };

  std::string url;   // as written
  Span anchor_span;  // exactly the URL text in the body
  std::string context;
  Kind kind = Kind::Inline;
  /// Where the citation is used. Equals anchor_span.begin except for
  /// reference-style links, whose URL lives in a definition line.
  std::size_t usage_offset = 0;
  std::optional<std::size_t> sentence;  // index into Report::sentences
};

struct Section {
  std::optional<std::string> heading;
  int level = 1;
  std::vector<std::string> paragraphs;
};

struct Sentence {
  Span span;
  std::string text;  // whitespace-squashed body slice
  std::size_t section = 0;
  bool link_only = false;  // nothing but citation markup
};

struct Report {
  std::string task_id;
  std::string query;
  std::string body;
  std::vector<Section> sections;
  std::vector<CitationLink> citations;
  std::vector<Sentence> sentences;
  std::optional<Date> generated_at;
  std::vector<std::string> diagnostics;

  std::string_view slice(Span s) const { return std::string_view(body).substr(s.begin, s.size()); }
};

struct ReportStats {
  std::size_t word_count = 0;
  std::size_t section_count = 0;
  std::size_t citation_count = 0;
};

/// Throws Error(EmptyInput) for blank input. Unsupported citation styles
/// (numbered brackets without definitions, images) are noted in diagnostics.
Report parse_report(std::string_view markdown, std::string task_id, std::string query);

ReportStats report_stats(const Report& report);

}  // namespace dreval
