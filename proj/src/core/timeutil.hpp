#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace xrmdn {

/// Calendar fields of a UTC timestamp.
struct CivilTime {
    int year = 1970;
    int month = 1;   // 1..12
    int day = 1;     // 1..31
    int hour = 0;    // 0..23
    int minute = 0;
    int second = 0;
};

/// Days since 1970-01-01 for a proleptic Gregorian date.
[[nodiscard]] std::int64_t days_from_civil(int year, int month, int day);

[[nodiscard]] CivilTime civil_from_timestamp(std::int64_t ts);
[[nodiscard]] std::int64_t timestamp_from_civil(const CivilTime& c);

/// Parses "YYYY-MM-DDTHH:MM:SS[Z]" (a space instead of 'T' and a bare
/// "YYYY-MM-DD" are also accepted). All timestamps are UTC. Throws ParseError
/// with the offending text on malformed input.
[[nodiscard]] std::int64_t parse_rfc3339(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
[[nodiscard]] std::string format_rfc3339(std::int64_t ts);

/// Day of week with Monday = 0 .. Sunday = 6.
[[nodiscard]] int weekday_of(std::int64_t ts);

/// Meteorological season from the month: 1 winter (Dec-Feb), 2 spring,
/// 3 summer, 4 fall.
[[nodiscard]] int season_of_month(int month);

}  // namespace xrmdn
