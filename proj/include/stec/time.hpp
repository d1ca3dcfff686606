#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "stec/error.hpp"

namespace stec {

using Timestamp = std::chrono::sys_seconds;

/// Length of a generation record's interval.
enum class Resolution { hour = 0, day = 1, month = 2, year = 3 };

inline std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::hour: return "hour";
    case Resolution::day: return "day";
    case Resolution::month: return "month";
    case Resolution::year: return "year";
  }
  return "?";
}

inline std::optional<Resolution> parse_resolution(std::string_view s) {
  if (s == "hour") return Resolution::hour;
  if (s == "day") return Resolution::day;
  if (s == "month") return Resolution::month;
  if (s == "year") return Resolution::year;
  return std::nullopt;
}

/// Half-open [from, to) span of UTC time.
struct TimeSpan {
  Timestamp from;
  Timestamp to;

  bool contains(Timestamp t) const { return from <= t && t < to; }
};

namespace detail {

inline bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return res.ec == std::errc{};
}

inline std::chrono::year_month_day ymd_of(Timestamp t) {
  return std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(t)};
}

inline Timestamp at_midnight(std::chrono::year_month_day ymd) {
  return Timestamp{std::chrono::sys_days{ymd}};
}

}  // namespace detail

/// Parses an ISO-8601 UTC timestamp.
///
/// Accepted forms: `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS](Z|+HH:MM|-HH:MM|+HHMM)`
/// (a space may replace `T`). A date alone means midnight UTC; a time of day
/// without an offset is rejected because bucketing must be deterministic.
inline Timestamp parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  auto fail = [&](const char* why) -> DataError {
    return DataError("malformed timestamp '" + std::string(s) + "': " + why);
  };
  int y = 0, mo = 0, d = 0;
  if (s.size() < 10 || !detail::read_int(s, 0, 4, y) || s[4] != '-' ||
      !detail::read_int(s, 5, 2, mo) || s[7] != '-' || !detail::read_int(s, 8, 2, d)) {
    throw fail("expected YYYY-MM-DD");
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw fail("invalid calendar date");
  Timestamp base = detail::at_midnight(ymd);
  if (s.size() == 10) return base;

  if (s[10] != 'T' && s[10] != ' ') throw fail("expected 'T' after date");
  int hh = 0, mm = 0, ss = 0;
  if (!detail::read_int(s, 11, 2, hh) || s.size() < 16 || s[13] != ':' ||
      !detail::read_int(s, 14, 2, mm)) {
    throw fail("expected HH:MM");
  }
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (!detail::read_int(s, pos + 1, 2, ss)) throw fail("expected seconds");
    pos += 3;
  }
  if (hh > 23 || mm > 59 || ss > 60) throw fail("time of day out of range");
  if (pos >= s.size()) throw fail("missing UTC offset (append Z or +HH:MM)");

  int offset_minutes = 0;
  std::string_view tz = s.substr(pos);
  if (tz == "Z" || tz == "z") {
    offset_minutes = 0;
  } else if (tz[0] == '+' || tz[0] == '-') {
    int oh = 0, om = 0;
    if (tz.size() == 6 && tz[3] == ':' && detail::read_int(tz, 1, 2, oh) &&
        detail::read_int(tz, 4, 2, om)) {
    } else if (tz.size() == 5 && detail::read_int(tz, 1, 2, oh) && detail::read_int(tz, 3, 2, om)) {
    } else if (tz.size() == 3 && detail::read_int(tz, 1, 2, oh)) {
    } else {
      throw fail("bad UTC offset");
    }
    offset_minutes = (oh * 60 + om) * (tz[0] == '-' ? -1 : 1);
  } else {
    throw fail("bad UTC offset");
  }
  return base + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_minutes};
}

/// `YYYY-MM-DDTHH:MM:SSZ`; always UTC.
inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto dp = floor<days>(t);
  year_month_day ymd{dp};
  hh_mm_ss<seconds> tod{t - dp};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

/// End of an interval of the given resolution starting at `start`.
/// Month and year lengths follow the calendar.
inline Timestamp interval_end(Timestamp start, Resolution r) {
  using namespace std::chrono;
  switch (r) {
    case Resolution::hour: return start + hours{1};
    case Resolution::day: return start + days{1};
    case Resolution::month:
    case Resolution::year: {
      auto dp = floor<days>(start);
      auto tod = start - dp;
      year_month_day ymd{dp};
      auto next = r == Resolution::month ? ymd + months{1} : ymd + years{1};
      if (!next.ok()) next = next.year() / next.month() / last;
      return Timestamp{sys_days{next}} + tod;
    }
  }
  return start;
}

}  // namespace stec
