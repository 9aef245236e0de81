#include "fraudlens/time.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace fraudlens {
namespace {

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  const char* first = text.data() + pos;
  const char* last = first + len;
  for (const char* p = first; p != last; ++p) {
    if (*p < '0' || *p > '9') return false;
  }
  return std::from_chars(first, last, out).ec == std::errc{};
}

std::optional<Date> make_date(int y, int m, int d) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_int(text, 0, 4, y) || !read_int(text, 5, 2, m) || !read_int(text, 8, 2, d)) {
    return std::nullopt;
  }
  return make_date(y, m, d);
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  if (text.size() < 19) return std::nullopt;
  auto date = parse_date(text.substr(0, 10));
  if (!date) return std::nullopt;
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (text[13] != ':' || text[16] != ':') return std::nullopt;
  if (!read_int(text, 11, 2, hh) || !read_int(text, 14, 2, mm) || !read_int(text, 17, 2, ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t digits_start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == digits_start) return std::nullopt;
  }
  int offset_minutes = 0;
  if (pos < text.size()) {
    const char c = text[pos];
    if ((c == 'Z' || c == 'z') && pos + 1 == text.size()) {
      // UTC
    } else if ((c == '+' || c == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
      int oh = 0, om = 0;
      if (!read_int(text, pos + 1, 2, oh) || !read_int(text, pos + 4, 2, om)) return std::nullopt;
      if (oh > 23 || om > 59) return std::nullopt;
      offset_minutes = (c == '+' ? 1 : -1) * (oh * 60 + om);
    } else {
      return std::nullopt;
    }
  }
  const std::int64_t secs = static_cast<std::int64_t>(hh) * 3600 + mm * 60 + ss -
                            static_cast<std::int64_t>(offset_minutes) * 60;
  return Timestamp{*date} + std::chrono::seconds{secs};
}

std::string format_iso8601(Timestamp ts) {
  const Date d = day_of(ts);
  const std::int64_t secs = (ts - Timestamp{d}).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(d).c_str(),
                static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60),
                static_cast<int>(secs % 60));
  return buf;
}

std::optional<Timestamp> parse_with_format(const std::string& text, const std::string& format,
                                           int utc_offset_minutes) {
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, format.c_str());
  if (in.fail()) return std::nullopt;
  in >> std::ws;
  if (!in.eof()) return std::nullopt;
  auto date = make_date(tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday);
  if (!date) return std::nullopt;
  const std::int64_t secs = static_cast<std::int64_t>(tm.tm_hour) * 3600 + tm.tm_min * 60 +
                            tm.tm_sec - static_cast<std::int64_t>(utc_offset_minutes) * 60;
  return Timestamp{*date} + std::chrono::seconds{secs};
}

}  // namespace fraudlens
