#include "outage/time.hpp"

#include <charconv>
#include <cstdio>

#include "outage/error.hpp"

namespace outage {

namespace {

int digits(std::string_view s, std::size_t pos, std::size_t len) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
  if (ec != std::errc{} || ptr != s.data() + pos + len) throw UserError("malformed timestamp '" + std::string(s) + "'");
  return value;
}

}  // namespace

UtcTime parse_utc(std::string_view s) {
  using namespace std::chrono;
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z')
    throw UserError("malformed timestamp '" + std::string(s) + "' (expected YYYY-MM-DDTHH:MM:SSZ)");
  const year_month_day ymd{year{digits(s, 0, 4)}, month{static_cast<unsigned>(digits(s, 5, 2))},
                           day{static_cast<unsigned>(digits(s, 8, 2))}};
  const int hh = digits(s, 11, 2);
  const int mm = digits(s, 14, 2);
  const int ss = digits(s, 17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) throw UserError("invalid timestamp '" + std::string(s) + "'");
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_utc(UtcTime t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{t - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

int local_month(UtcTime t, Hours utc_offset) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(t + utc_offset)};
  return static_cast<int>(static_cast<unsigned>(ymd.month()));
}

long long local_day(UtcTime t, Hours utc_offset) {
  using namespace std::chrono;
  return floor<days>(t + utc_offset).time_since_epoch().count();
}

}  // namespace outage
