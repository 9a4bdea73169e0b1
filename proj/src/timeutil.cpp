#include "rpmguard/timeutil.hpp"

#include <array>
#include <cstdio>

#include "rpmguard/errors.hpp"

namespace rpmguard {

namespace {

// Civil-calendar conversions (Howard Hinnant's algorithms), locale-free.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

int read_int(const std::string& s, std::size_t pos, std::size_t len) {
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!is_digit(s[i])) throw ParseError("bad timestamp: '" + s + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace

TimePoint parse_iso8601(const std::string& text) {
  // YYYY-MM-DDTHH:MM:SSZ (20 chars, UTC only)
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' ||
      text[10] != 'T' || text[13] != ':' || text[16] != ':' ||
      text[19] != 'Z') {
    throw ParseError("bad timestamp: '" + text +
                     "' (expected YYYY-MM-DDTHH:MM:SSZ)");
  }
  const int y = read_int(text, 0, 4);
  const int mo = read_int(text, 5, 2);
  const int d = read_int(text, 8, 2);
  const int h = read_int(text, 11, 2);
  const int mi = read_int(text, 14, 2);
  const int s = read_int(text, 17, 2);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
    throw ParseError("timestamp field out of range: '" + text + "'");
  }
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(TimePoint t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

std::string utc_date(TimePoint t) { return format_iso8601(t).substr(0, 10); }

int utc_weekday(TimePoint t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) --days;
  // 1970-01-01 was a Thursday (= 3 with Monday as 0).
  std::int64_t w = (days + 3) % 7;
  if (w < 0) w += 7;
  return static_cast<int>(w);
}

Duration seconds_into_day(TimePoint t) {
  std::int64_t rem = t % 86400;
  if (rem < 0) rem += 86400;
  return rem;
}

}  // namespace rpmguard
