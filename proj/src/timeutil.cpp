#include "optiplan/timeutil.hpp"

#include <cstdio>

#include "optiplan/errors.hpp"

namespace optiplan {

namespace {

// Civil-date conversions on a proleptic Gregorian calendar (era-based
// algorithm; exact for the full int64 range used here).
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += (m <= 2);
}

}  // namespace

std::string iso_from_epoch_hours(std::int64_t hours) {
    std::int64_t days = hours / 24;
    int hod = static_cast<int>(hours % 24);
    if (hod < 0) {
        hod += 24;
        days -= 1;
    }
    std::int64_t y;
    int m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02d-%02dT%02d:00:00Z",
                  static_cast<long long>(y), m, d, hod);
    return buf;
}

std::int64_t epoch_hours_from_iso(const std::string& iso) {
    long long y = 0;
    int m = 0, d = 0, h = 0, mi = 0, s = 0;
    const int got = std::sscanf(iso.c_str(), "%lld-%d-%dT%d:%d:%d", &y, &m, &d, &h, &mi, &s);
    if (got < 4 || m < 1 || m > 12 || d < 1 || d > 31 || h < 0 || h > 23) {
        throw ParseError("invalid ISO-8601 timestamp: " + iso);
    }
    return days_from_civil(y, m, d) * 24 + h;
}

int hour_of_day(std::int64_t epoch_hours) {
    const int h = static_cast<int>(epoch_hours % 24);
    return h < 0 ? h + 24 : h;
}

}  // namespace optiplan
