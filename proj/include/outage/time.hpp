#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace outage {

using UtcTime = std::chrono::sys_seconds;
using Hours = std::chrono::hours;

/// Parses `YYYY-MM-DDTHH:MM:SSZ`. Throws UserError on anything else.
UtcTime parse_utc(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_utc(UtcTime t);

/// Calendar month (1..12) of `t` shifted by a fixed UTC offset.
int local_month(UtcTime t, Hours utc_offset);

/// Local calendar day index (days since epoch) of `t` shifted by `utc_offset`.
long long local_day(UtcTime t, Hours utc_offset);

inline bool is_hour_aligned(UtcTime t) { return t.time_since_epoch().count() % 3600 == 0; }
inline bool is_quarter_aligned(UtcTime t) { return t.time_since_epoch().count() % 900 == 0; }

inline UtcTime floor_hour(UtcTime t) { return std::chrono::floor<Hours>(t); }

}  // namespace outage
