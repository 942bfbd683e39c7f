#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "optiplan/rng.hpp"
#include "optiplan/timeseries.hpp"

namespace optiplan::traffic {

/// Shape parameters of one tunnel's synthetic traffic. Values are in generic
/// bandwidth units; amplitudes are fractions of the base level.
struct TrafficProfile {
    double base = 100.0;
    double daily_amp = 0.0;
    double weekly_amp = 0.0;
    double asymmetry = 0.0;  // in [0,1): skews the daily rise vs fall
    double trend_per_hour = 0.0;
    double noise_sd = 0.0;
    /// (hour index into the series, multiplicative factor); the factor applies
    /// from that hour onward.
    std::vector<std::pair<std::int64_t, double>> jumps;
};

/// Daily unit waveform, 24 h periodic in the absolute UTC hour. Rises from -1
/// to +1 over (1-asymmetry)*12 h starting at midnight, then falls back over
/// (1+asymmetry)*12 h:
///   s(u) = -cos(pi*u/r)          for u in [0, r),   r = 12*(1-asymmetry)
///   s(u) =  cos(pi*(u-r)/(24-r)) for u in [r, 24)
double daily_waveform(double hour_of_cycle, double asymmetry);

/// Weekly unit waveform: w(u) = cos(2*pi*u/168), 168 h periodic.
double weekly_waveform(double hour_of_cycle);

/// 2025-01-06T00:00:00Z, a Monday, so weekly phase starts at a week boundary.
std::int64_t default_start_hour();

/// x_t = max(0, base*(1 + daily_amp*s + weekly_amp*w) + trend*t + noise) *
/// (product of jump factors scheduled at or before t). Waveforms are evaluated
/// at the absolute UTC hour so the daily shape is anchored to wall-clock time.
TimeSeries generate_series(const TrafficProfile& profile, std::size_t n_hours,
                           num::SeededRng& rng, std::int64_t start_hour = default_start_hour());

using ProfileSampler = std::function<TrafficProfile(std::size_t tunnel_index, num::SeededRng&)>;

/// One series per (src, dst, class), K*N*(N-1) in total, tunnel ids
/// "<src>-<dst>-c<class>". Noise per tunnel is mixed from one shared
/// network-wide stream and an independent stream with amplitude weights
/// sqrt(rho_shared) and sqrt(1-rho_shared), so any two tunnels' noise
/// correlates at rho_shared. Per-tunnel seeds are derived from the master
/// seed and the tunnel index, so generation order does not matter.
std::vector<std::pair<std::string, TimeSeries>> generate_matrix_series(
    const std::vector<std::string>& endpoints, int n_classes, const ProfileSampler& sampler,
    double rho_shared, std::size_t n_hours, const num::SeededRng& rng,
    std::int64_t start_hour = default_start_hour());

/// Profile-set config, JSON. Numeric fields accept either a number or a
/// [lo, hi] range sampled uniformly per tunnel. "noise_frac_of_base" may be
/// given instead of "noise_sd".
struct GeneratorConfig {
    std::vector<std::string> endpoints;
    int n_classes = 1;
    std::size_t n_hours = 168;
    double rho_shared = 0.0;
    std::int64_t start_hour = default_start_hour();
    std::string profile_json;  // raw profile spec, re-sampled per tunnel
};

GeneratorConfig generator_config_from_json(const std::string& text);
ProfileSampler sampler_from_config(const GeneratorConfig& config);

}  // namespace optiplan::traffic
