#include "smartpark/time_util.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>

#include "smartpark/errors.hpp"

namespace smartpark {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, long long& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

bool DayWindow::contains(UnixSeconds t) const noexcept {
  const int s = seconds_of_day(t);
  return s >= from_s && s <= to_s;
}

UnixSeconds parse_time(std::string_view text) {
  text = trim(text);
  long long raw = 0;
  if (parse_int(text, raw)) return raw;

  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  const std::string buf(text);
  int consumed = 0;
  const int n = std::sscanf(buf.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &consumed);
  if (n != 3) throw ParseError("unrecognized time '" + buf + "'");
  if (static_cast<std::size_t>(consumed) < buf.size()) {
    const char* rest = buf.c_str() + consumed;
    int used = 0;
    if (std::sscanf(rest, "T%2d:%2d:%2d%n", &h, &mi, &sec, &used) == 3 && rest[used] == '\0') {
    } else if (std::sscanf(rest, "T%2d:%2d%n", &h, &mi, &used) == 2 && rest[used] == '\0') {
      sec = 0;
    } else {
      throw ParseError("unrecognized time '" + buf + "'");
    }
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) {
    throw ParseError("time field out of range in '" + buf + "'");
  }
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = sec;
  return static_cast<UnixSeconds>(timegm(&tm));
}

TimeRange parse_horizon(std::string_view text) {
  const auto pos = text.find("..");
  if (pos == std::string_view::npos) {
    throw ParseError("horizon must look like <start>..<end>, got '" + std::string(text) + "'");
  }
  TimeRange r{parse_time(text.substr(0, pos)), parse_time(text.substr(pos + 2))};
  if (r.empty()) throw RangeError("horizon is empty: '" + std::string(text) + "'");
  return r;
}

int parse_time_of_day(std::string_view text) {
  text = trim(text);
  const std::string buf(text);
  int h = 0, m = 0, s = 0, used = 0;
  if (std::sscanf(buf.c_str(), "%2d:%2d:%2d%n", &h, &m, &s, &used) == 3 &&
      static_cast<std::size_t>(used) == buf.size()) {
  } else if (std::sscanf(buf.c_str(), "%2d:%2d%n", &h, &m, &used) == 2 &&
             static_cast<std::size_t>(used) == buf.size()) {
    s = 0;
  } else {
    throw ParseError("expected HH:MM, got '" + buf + "'");
  }
  if (h < 0 || h > 24 || m < 0 || m > 59 || s < 0 || s > 59 || (h == 24 && (m | s) != 0)) {
    throw ParseError("time of day out of range: '" + buf + "'");
  }
  return h * 3600 + m * 60 + s;
}

DayWindow parse_day_window(std::string_view text) {
  const auto pos = text.find('-');
  if (pos == std::string_view::npos) {
    throw ParseError("window must look like HH:MM-HH:MM, got '" + std::string(text) + "'");
  }
  DayWindow w{parse_time_of_day(text.substr(0, pos)), parse_time_of_day(text.substr(pos + 1))};
  if (w.to_s < w.from_s) throw RangeError("window end precedes start: '" + std::string(text) + "'");
  return w;
}

std::string format_iso(UnixSeconds t) {
  const std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::string format_date(UnixSeconds t) {
  const std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday);
  return buf;
}

}  // namespace smartpark
