#include "optiplan/traffgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "optiplan/errors.hpp"
#include "optiplan/timeutil.hpp"

using nlohmann::json;

namespace optiplan {

std::string series_to_csv(const std::vector<std::pair<std::string, TimeSeries>>& series) {
    // Collect rows as (timestamp, tunnel) so output is hour-major.
    std::size_t max_len = 0;
    for (const auto& [id, ts] : series) max_len = std::max(max_len, ts.values.size());

    std::vector<std::size_t> order(series.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return series[a].first < series[b].first; });

    std::int64_t first_hour = 0;
    bool any = false;
    for (const auto& [id, ts] : series) {
        if (!any || ts.start_hour < first_hour) first_hour = ts.start_hour;
        any = true;
    }

    std::ostringstream out;
    out << "timestamp,tunnel_id,value\n";
    char buf[64];
    for (std::size_t t = 0; t < max_len; ++t) {
        for (std::size_t k : order) {
            const auto& [id, ts] = series[k];
            const std::int64_t hour = first_hour + static_cast<std::int64_t>(t);
            const std::int64_t offset = hour - ts.start_hour;
            if (offset < 0 || offset >= static_cast<std::int64_t>(ts.values.size())) continue;
            std::snprintf(buf, sizeof(buf), "%.10g", ts.values[static_cast<std::size_t>(offset)]);
            out << iso_from_epoch_hours(hour) << ',' << id << ',' << buf << '\n';
        }
    }
    return out.str();
}

std::vector<std::pair<std::string, TimeSeries>> series_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty series CSV");
    if (line != "timestamp,tunnel_id,value" && line != "timestamp,tunnel_id,value\r") {
        throw ParseError("series CSV must start with header 'timestamp,tunnel_id,value'");
    }
    std::map<std::string, TimeSeries> parts;
    std::vector<std::string> id_order;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw ParseError("series CSV line " + std::to_string(line_no) + " is malformed");
        }
        const std::string stamp = line.substr(0, c1);
        const std::string id = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string value_text = line.substr(c2 + 1);
        const std::int64_t hour = epoch_hours_from_iso(stamp);
        double value = 0.0;
        try {
            std::size_t pos = 0;
            value = std::stod(value_text, &pos);
            if (pos != value_text.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError("series CSV line " + std::to_string(line_no) +
                             " has a bad value '" + value_text + "'");
        }
        auto [it, inserted] = parts.try_emplace(id);
        if (inserted) {
            it->second.start_hour = hour;
            id_order.push_back(id);
        } else {
            const std::int64_t expect =
                it->second.start_hour + static_cast<std::int64_t>(it->second.values.size());
            if (hour != expect) {
                throw ParseError("series for tunnel '" + id + "' is not hourly-contiguous at " +
                                 stamp);
            }
        }
        it->second.values.push_back(value);
    }
    std::vector<std::pair<std::string, TimeSeries>> out;
    out.reserve(id_order.size());
    for (const auto& id : id_order) out.emplace_back(id, std::move(parts.at(id)));
    return out;
}

void save_series_csv(const std::vector<std::pair<std::string, TimeSeries>>& series,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write series CSV '" + path + "'");
    out << series_to_csv(series);
}

std::vector<std::pair<std::string, TimeSeries>> load_series_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open series CSV '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return series_from_csv(buf.str());
}

}  // namespace optiplan

namespace optiplan::traffic {

double daily_waveform(double hour_of_cycle, double asymmetry) {
    const double rise = 12.0 * (1.0 - asymmetry);
    const double u = hour_of_cycle;
    if (u < rise) return -std::cos(std::numbers::pi * u / rise);
    return std::cos(std::numbers::pi * (u - rise) / (24.0 - rise));
}

double weekly_waveform(double hour_of_cycle) {
    return std::cos(2.0 * std::numbers::pi * hour_of_cycle / 168.0);
}

std::int64_t default_start_hour() {
    static const std::int64_t h = epoch_hours_from_iso("2025-01-06T00:00:00Z");
    return h;
}

namespace {

// The stochastic term mirrors the texture of measured tunnel traffic: half of
// its variance is a persistent hourly AR(1) level wander (phi = kLevelPhi,
// roughly 1.5-day memory) and half is white measurement noise, both scaled by
// the current seasonal level. noise_z supplies 2*n_hours standard normals:
// the first n_hours drive the white part, the rest drive the AR innovations.
constexpr double kLevelPhi = 0.98;
constexpr double kLevelWeight = 0.5;  // variance share of the persistent part

TimeSeries generate_with_noise(const TrafficProfile& profile, std::size_t n_hours,
                               std::int64_t start_hour, const std::vector<double>& noise_z) {
    TimeSeries ts;
    ts.start_hour = start_hour;
    ts.values.resize(n_hours);
    // Jump factors sorted by hour; factor applies from its hour onward.
    auto jumps = profile.jumps;
    std::sort(jumps.begin(), jumps.end());
    std::size_t next_jump = 0;
    double jump_factor = 1.0;
    const double w_slow = std::sqrt(kLevelWeight);
    const double w_white = std::sqrt(1.0 - kLevelWeight);
    double slow = noise_z[n_hours];  // stationary start
    for (std::size_t t = 0; t < n_hours; ++t) {
        while (next_jump < jumps.size() && jumps[next_jump].first <= static_cast<std::int64_t>(t)) {
            jump_factor *= jumps[next_jump].second;
            ++next_jump;
        }
        if (t > 0) {
            slow = kLevelPhi * slow +
                   std::sqrt(1.0 - kLevelPhi * kLevelPhi) * noise_z[n_hours + t];
        }
        const std::int64_t abs_hour = start_hour + static_cast<std::int64_t>(t);
        const double u24 = static_cast<double>(((abs_hour % 24) + 24) % 24);
        const double u168 = static_cast<double>(((abs_hour % 168) + 168) % 168);
        const double seasonal = 1.0 + profile.daily_amp * daily_waveform(u24, profile.asymmetry) +
                                profile.weekly_amp * weekly_waveform(u168);
        const double noise = profile.noise_sd * seasonal * (w_slow * slow + w_white * noise_z[t]);
        double v = profile.base * seasonal + profile.trend_per_hour * static_cast<double>(t) +
                   noise;
        v = std::max(0.0, v) * jump_factor;
        ts.values[t] = v;
    }
    return ts;
}

}  // namespace

TimeSeries generate_series(const TrafficProfile& profile, std::size_t n_hours,
                           num::SeededRng& rng, std::int64_t start_hour) {
    std::vector<double> z(2 * n_hours);
    for (auto& v : z) v = rng.normal();
    return generate_with_noise(profile, n_hours, start_hour, z);
}

std::vector<std::pair<std::string, TimeSeries>> generate_matrix_series(
    const std::vector<std::string>& endpoints, int n_classes, const ProfileSampler& sampler,
    double rho_shared, std::size_t n_hours, const num::SeededRng& rng,
    std::int64_t start_hour) {
    const std::size_t n = endpoints.size();
    if (n < 2) throw Error("matrix generation needs at least two endpoints");
    if (n_classes < 1) throw Error("matrix generation needs at least one class");

    num::SeededRng shared_rng = rng.derive(0);
    std::vector<double> shared_z(2 * n_hours);
    for (auto& v : shared_z) v = shared_rng.normal();

    const double w_shared = std::sqrt(std::clamp(rho_shared, 0.0, 1.0));
    const double w_indep = std::sqrt(1.0 - std::clamp(rho_shared, 0.0, 1.0));

    std::vector<std::pair<std::string, TimeSeries>> out;
    std::size_t tunnel_index = 0;
    for (int k = 0; k < n_classes; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                num::SeededRng tunnel_rng = rng.derive(1 + tunnel_index);
                TrafficProfile profile = sampler(tunnel_index, tunnel_rng);
                std::vector<double> z(2 * n_hours);
                for (std::size_t t = 0; t < 2 * n_hours; ++t) {
                    z[t] = w_shared * shared_z[t] + w_indep * tunnel_rng.normal();
                }
                std::string id = endpoints[i] + "-" + endpoints[j] + "-c" + std::to_string(k);
                out.emplace_back(std::move(id),
                                 generate_with_noise(profile, n_hours, start_hour, z));
                ++tunnel_index;
            }
        }
    }
    return out;
}

namespace {

double sample_field(const json& j, const char* key, double fallback, num::SeededRng& rng) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_array()) {
        if (v.size() != 2) throw ParseError(std::string("field '") + key + "' range must be [lo, hi]");
        return rng.uniform(v.at(0).get<double>(), v.at(1).get<double>());
    }
    return v.get<double>();
}

}  // namespace

GeneratorConfig generator_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid generator config: ") + e.what());
    }
    try {
        GeneratorConfig config;
        if (doc.contains("endpoints")) {
            config.endpoints = doc.at("endpoints").get<std::vector<std::string>>();
        } else {
            const int n = doc.value("n_endpoints", 2);
            for (int i = 0; i < n; ++i) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "E%02d", i);
                config.endpoints.emplace_back(buf);
            }
        }
        config.n_classes = doc.value("n_classes", 1);
        config.n_hours = doc.value("n_hours", std::size_t{168});
        config.rho_shared = doc.value("rho_shared", 0.0);
        if (doc.contains("start")) {
            config.start_hour = epoch_hours_from_iso(doc.at("start").get<std::string>());
        }
        config.profile_json = doc.value("profile", json::object()).dump();
        return config;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid generator config: ") + e.what());
    }
}

ProfileSampler sampler_from_config(const GeneratorConfig& config) {
    const json spec = json::parse(config.profile_json);
    return [spec](std::size_t, num::SeededRng& rng) {
        TrafficProfile p;
        p.base = sample_field(spec, "base", p.base, rng);
        p.daily_amp = sample_field(spec, "daily_amp", p.daily_amp, rng);
        p.weekly_amp = sample_field(spec, "weekly_amp", p.weekly_amp, rng);
        p.asymmetry = sample_field(spec, "asymmetry", p.asymmetry, rng);
        p.trend_per_hour = sample_field(spec, "trend_per_hour", p.trend_per_hour, rng);
        if (spec.contains("noise_frac_of_base")) {
            p.noise_sd = sample_field(spec, "noise_frac_of_base", 0.0, rng) * p.base;
        } else {
            p.noise_sd = sample_field(spec, "noise_sd", p.noise_sd, rng);
        }
        if (spec.contains("jumps")) {
            for (const auto& j : spec.at("jumps")) {
                p.jumps.emplace_back(j.at(0).get<std::int64_t>(), j.at(1).get<double>());
            }
        }
        return p;
    };
}

}  // namespace optiplan::traffic
