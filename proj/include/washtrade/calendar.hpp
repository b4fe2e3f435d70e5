#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace washtrade {

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// floor(a / b) for b > 0.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    const std::int64_t q = a / b;
    return (a % b != 0 && a < 0) ? q - 1 : q;
}

constexpr std::int64_t utc_day(std::int64_t timestamp) { return floor_div(timestamp, kSecondsPerDay); }

/// "YYYY-MM-DD" -> days since epoch.
std::optional<std::int64_t> parse_iso_date(std::string_view s);
std::string format_iso_date(std::int64_t day);

/// First day of the calendar month containing `day`.
std::int64_t month_start(std::int64_t day);
/// Monday of the ISO week containing `day`.
std::int64_t iso_week_start(std::int64_t day);
/// "2018-W05" style label for an ISO week starting at `monday`.
std::string format_iso_week(std::int64_t monday);
/// "2018-01" style label.
std::string format_month(std::int64_t first_day);

}  // namespace washtrade
