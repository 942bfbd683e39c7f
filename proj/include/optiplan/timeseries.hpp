#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace optiplan {

/// Hourly series of bandwidth samples starting at a UTC hour.
struct TimeSeries {
    std::int64_t start_hour = 0;  // hours since the Unix epoch; step is 1 h
    std::vector<double> values;

    std::int64_t hour_at(std::size_t index) const {
        return start_hour + static_cast<std::int64_t>(index);
    }
};

/// Series CSV format: header `timestamp,tunnel_id,value`, ISO-8601 UTC
/// timestamps, rows ordered by timestamp then tunnel id.
std::string series_to_csv(const std::vector<std::pair<std::string, TimeSeries>>& series);
std::vector<std::pair<std::string, TimeSeries>> series_from_csv(const std::string& text);

void save_series_csv(const std::vector<std::pair<std::string, TimeSeries>>& series,
                     const std::string& path);
std::vector<std::pair<std::string, TimeSeries>> load_series_csv(const std::string& path);

}  // namespace optiplan
