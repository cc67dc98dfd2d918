#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace smartpark {

/// Unix seconds, UTC. All wall-clock reasoning in the library is UTC.
using UnixSeconds = std::int64_t;

inline constexpr UnixSeconds kSecondsPerDay = 86400;
inline constexpr UnixSeconds kWindowSeconds = 300;  // 5-minute series granularity

struct TimeRange {
  UnixSeconds start{0};
  UnixSeconds end{0};  // exclusive

  [[nodiscard]] bool empty() const noexcept { return end <= start; }
  [[nodiscard]] bool contains(UnixSeconds t) const noexcept { return t >= start && t < end; }
};

/// Daily time-of-day window [from, to], both inclusive, in seconds after midnight.
struct DayWindow {
  int from_s{0};
  int to_s{kSecondsPerDay - 1};

  [[nodiscard]] bool contains(UnixSeconds t) const noexcept;
};

/// Accepts raw unix seconds ("1380600000") or ISO-8601 UTC
/// ("2013-10-01", "2013-10-01T06:00", "2013-10-01T06:00:00", optional trailing Z).
UnixSeconds parse_time(std::string_view text);

/// "start..end" using parse_time for each side.
TimeRange parse_horizon(std::string_view text);

/// "HH:MM" or "HH:MM:SS" -> seconds after midnight.
int parse_time_of_day(std::string_view text);

/// "HH:MM-HH:MM" -> inclusive daily window.
DayWindow parse_day_window(std::string_view text);

std::string format_iso(UnixSeconds t);
std::string format_date(UnixSeconds t);  // YYYY-MM-DD

inline int seconds_of_day(UnixSeconds t) noexcept {
  const auto r = t % kSecondsPerDay;
  return static_cast<int>(r < 0 ? r + kSecondsPerDay : r);
}

inline UnixSeconds floor_to(UnixSeconds t, UnixSeconds step) noexcept {
  const auto r = t % step;
  return t - (r < 0 ? r + step : r);
}

inline UnixSeconds ceil_to(UnixSeconds t, UnixSeconds step) noexcept {
  const auto f = floor_to(t, step);
  return f == t ? t : f + step;
}

}  // namespace smartpark
