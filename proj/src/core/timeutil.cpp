#include "core/timeutil.hpp"

#include <cstdio>

#include "core/errors.hpp"

namespace xrmdn {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

namespace {

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

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

}  // namespace

CivilTime civil_from_timestamp(std::int64_t ts) {
    const std::int64_t days = floor_div(ts, 86400);
    const std::int64_t secs = floor_mod(ts, 86400);
    CivilTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour = static_cast<int>(secs / 3600);
    c.minute = static_cast<int>((secs % 3600) / 60);
    c.second = static_cast<int>(secs % 60);
    return c;
}

std::int64_t timestamp_from_civil(const CivilTime& c) {
    return days_from_civil(c.year, c.month, c.day) * 86400 + c.hour * 3600 + c.minute * 60 +
           c.second;
}

std::int64_t parse_rfc3339(std::string_view text) {
    CivilTime c;
    const std::string s(text);
    char sep = 0;
    char tail[8] = {0};
    int n = std::sscanf(s.c_str(), "%d-%2d-%2d%c%2d:%2d:%2d%7s", &c.year, &c.month, &c.day, &sep,
                        &c.hour, &c.minute, &c.second, tail);
    if (n == 3) {
        // bare date, midnight UTC
    } else if (n >= 7) {
        if (sep != 'T' && sep != 't' && sep != ' ') {
            throw ParseError("malformed timestamp '" + s + "': expected 'T' date/time separator");
        }
        if (n == 8 && std::string_view(tail) != "Z" && std::string_view(tail) != "z" &&
            std::string_view(tail) != "+00:00") {
            throw ParseError("malformed timestamp '" + s + "': only UTC ('Z') offsets are supported");
        }
    } else {
        throw ParseError("malformed timestamp '" + s + "'");
    }
    if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31 || c.hour > 23 || c.minute > 59 ||
        c.second > 60 || c.hour < 0 || c.minute < 0 || c.second < 0) {
        throw ParseError("timestamp field out of range in '" + s + "'");
    }
    return timestamp_from_civil(c);
}

std::string format_rfc3339(std::int64_t ts) {
    const CivilTime c = civil_from_timestamp(ts);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day,
                  c.hour, c.minute, c.second);
    return buf;
}

int weekday_of(std::int64_t ts) {
    const std::int64_t days = floor_div(ts, 86400);
    return static_cast<int>(floor_mod(days + 3, 7));  // 1970-01-01 was a Thursday
}

int season_of_month(int month) {
    if (month == 12 || month == 1 || month == 2) return 1;
    if (month <= 5) return 2;
    if (month <= 8) return 3;
    return 4;
}

}  // namespace xrmdn
