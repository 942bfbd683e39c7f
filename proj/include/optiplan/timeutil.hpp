#pragma once

#include <cstdint>
#include <string>

namespace optiplan {

/// Hours since the Unix epoch -> "YYYY-MM-DDTHH:00:00Z".
std::string iso_from_epoch_hours(std::int64_t hours);

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (minutes/seconds ignored) back to epoch
/// hours. Throws ParseError on malformed input.
std::int64_t epoch_hours_from_iso(const std::string& iso);

/// UTC hour of day in [0, 24).
int hour_of_day(std::int64_t epoch_hours);

}  // namespace optiplan
