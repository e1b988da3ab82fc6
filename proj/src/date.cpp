#include "dreval/date.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <ctime>

namespace dreval {
namespace {

std::optional<int> parse_digits(std::string_view s, size_t width) {
  if (s.size() != width) return std::nullopt;
  int value = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

Date PartialDate::last_day() const {
  using namespace std::chrono;
  switch (precision) {
    case Precision::Day: return first_day;
    case Precision::Month: return year_month_day{year_month_day_last{first_day.year(), month_day_last{first_day.month()}}};
    case Precision::Year: return year_month_day{first_day.year(), December, day{31}};
  }
  return first_day;
}

std::string PartialDate::to_string() const {
  const std::string full = format_iso_date(first_day);
  switch (precision) {
    case Precision::Year: return full.substr(0, 4);
    case Precision::Month: return full.substr(0, 7);
    case Precision::Day: return full;
  }
  return full;
}

std::optional<PartialDate> parse_partial_date(std::string_view s) {
  using namespace std::chrono;
  if (auto t = s.find('T'); t != std::string_view::npos) s = s.substr(0, t);
  const auto y = parse_digits(s.substr(0, 4), 4);
  if (!y) return std::nullopt;
  if (s.size() == 4) return PartialDate{year{*y} / January / day{1}, PartialDate::Precision::Year};
  if (s.size() < 7 || s[4] != '-') return std::nullopt;
  const auto m = parse_digits(s.substr(5, 2), 2);
  if (!m || *m < 1 || *m > 12) return std::nullopt;
  if (s.size() == 7) {
    return PartialDate{year{*y} / month{static_cast<unsigned>(*m)} / day{1}, PartialDate::Precision::Month};
  }
  if (s.size() != 10 || s[7] != '-') return std::nullopt;
  const auto d = parse_digits(s.substr(8, 2), 2);
  if (!d) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)}, day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return PartialDate{ymd, PartialDate::Precision::Day};
}

std::optional<Date> parse_iso_date(std::string_view s) {
  if (s.size() != 10) return std::nullopt;
  auto p = parse_partial_date(s);
  if (!p || p->precision != PartialDate::Precision::Day) return std::nullopt;
  return p->first_day;
}

std::string format_iso_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

Date today_utc() {
  return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

std::string now_timestamp_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dreval
