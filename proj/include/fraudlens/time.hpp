#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fraudlens {

// All timestamps are UTC with second precision.
using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

inline constexpr std::int64_t kSecondsPerDay = 86400;

// Accepts "YYYY-MM-DDTHH:MM:SS" with optional fractional seconds (truncated)
// and an optional "Z" or "+HH:MM"/"-HH:MM" offset. A space may replace the
// 'T'. Values without an offset are taken as UTC.
std::optional<Timestamp> parse_iso8601(std::string_view text);

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso8601(Timestamp ts);

// strptime-style parse of a local timestamp, normalized to UTC by
// subtracting utc_offset_minutes. The whole input must be consumed.
std::optional<Timestamp> parse_with_format(const std::string& text,
                                           const std::string& format,
                                           int utc_offset_minutes);

std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

inline Date day_of(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

inline std::int64_t day_number(Timestamp ts) {
  return day_of(ts).time_since_epoch().count();
}

inline Timestamp timestamp_from_unix(std::int64_t seconds) {
  return Timestamp{std::chrono::seconds{seconds}};
}

inline std::int64_t to_unix(Timestamp ts) { return ts.time_since_epoch().count(); }

}  // namespace fraudlens
