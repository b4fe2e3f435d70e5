#include "washtrade/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace washtrade {

namespace {

using std::chrono::day;
using std::chrono::days;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

year_month_day ymd_of(std::int64_t d) { return year_month_day{sys_days{days{d}}}; }

bool parse_int(std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

std::optional<std::int64_t> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) || !parse_int(s.substr(8, 2), d))
        return std::nullopt;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd}.time_since_epoch().count();
}

std::string format_iso_date(std::int64_t d) {
    const auto ymd = ymd_of(d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::int64_t month_start(std::int64_t d) {
    const auto ymd = ymd_of(d);
    return sys_days{ymd.year() / ymd.month() / 1}.time_since_epoch().count();
}

std::int64_t iso_week_start(std::int64_t d) {
    // 1970-01-01 was a Thursday; Monday-based weekday index is (d + 3) mod 7.
    const std::int64_t weekday = ((d + 3) % 7 + 7) % 7;
    return d - weekday;
}

std::string format_iso_week(std::int64_t monday) {
    // The ISO year is the calendar year of the week's Thursday.
    const std::int64_t thursday = monday + 3;
    const auto ymd = ymd_of(thursday);
    const std::int64_t jan1 = sys_days{ymd.year() / 1 / 1}.time_since_epoch().count();
    const std::int64_t week = (thursday - jan1) / 7 + 1;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-W%02d", static_cast<int>(ymd.year()), static_cast<int>(week));
    return buf;
}

std::string format_month(std::int64_t first_day) {
    const auto ymd = ymd_of(first_day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
    return buf;
}

}  // namespace washtrade
