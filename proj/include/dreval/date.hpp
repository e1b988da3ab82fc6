#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace dreval {

using Date = std::chrono::year_month_day;

/// Calendar date that may be known only to month or year precision.
struct PartialDate {
  enum class Precision { Year, Month, Day };

  Date first_day;
  Precision precision = Precision::Day;

  /// Latest calendar day the value could denote.
  Date last_day() const;
  std::string to_string() const;

  friend bool operator==(const PartialDate&, const PartialDate&) = default;
};

/// Strict "YYYY-MM-DD"; nullopt on any other shape or an invalid day.
std::optional<Date> parse_iso_date(std::string_view s);

/// "YYYY", "YYYY-MM" or "YYYY-MM-DD"; a trailing "T..." time part is ignored.
std::optional<PartialDate> parse_partial_date(std::string_view s);

std::string format_iso_date(Date d);

Date today_utc();

/// "YYYY-MM-DDTHH:MM:SSZ" for the current wall clock.
std::string now_timestamp_utc();

}  // namespace dreval
