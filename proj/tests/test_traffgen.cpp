#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "optiplan/errors.hpp"
#include "optiplan/timeutil.hpp"
#include "optiplan/traffgen.hpp"

using namespace optiplan;
using namespace optiplan::traffic;
using num::SeededRng;

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

double autocorrelation(const std::vector<double>& x, std::size_t lag) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        den += (x[t] - mean) * (x[t] - mean);
        if (t + lag < x.size()) num += (x[t] - mean) * (x[t + lag] - mean);
    }
    return num / den;
}

}  // namespace

TEST_CASE("flat profile yields a constant series") {
    TrafficProfile p;
    p.base = 10.0;
    SeededRng rng(1);
    const TimeSeries ts = generate_series(p, 100, rng);
    for (double v : ts.values) CHECK(v == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("same profile and seed twice gives identical series") {
    TrafficProfile p;
    p.base = 50.0;
    p.daily_amp = 0.4;
    p.noise_sd = 2.0;
    SeededRng a(99), b(99);
    CHECK(generate_series(p, 240, a).values == generate_series(p, 240, b).values);
}

TEST_CASE("daily amplitude 0.5 on base 100 swings between 50 and 150") {
    TrafficProfile p;
    p.base = 100.0;
    p.daily_amp = 0.5;
    SeededRng rng(3);
    const TimeSeries ts = generate_series(p, 168, rng);
    const double mx = *std::max_element(ts.values.begin(), ts.values.end());
    const double mn = *std::min_element(ts.values.begin(), ts.values.end());
    CHECK(mx == doctest::Approx(150.0).epsilon(0.01));
    CHECK(mn == doctest::Approx(50.0).epsilon(0.01));
    // every point matches the documented waveform exactly (noise off)
    for (std::size_t t = 0; t < ts.values.size(); ++t) {
        const std::int64_t abs_hour = ts.start_hour + static_cast<std::int64_t>(t);
        const double u = static_cast<double>(((abs_hour % 24) + 24) % 24);
        CHECK(ts.values[t] ==
              doctest::Approx(100.0 * (1.0 + 0.5 * daily_waveform(u, 0.0))).epsilon(1e-12));
    }
}

TEST_CASE("asymmetry splits the daily cycle into unequal rise and fall") {
    // rise spans 12*(1-a) hours: peak sits earlier in the day for a > 0
    CHECK(daily_waveform(0.0, 0.3) == doctest::Approx(-1.0));
    CHECK(daily_waveform(12.0 * 0.7, 0.3) == doctest::Approx(1.0));
    CHECK(daily_waveform(23.999, 0.3) == doctest::Approx(-1.0).epsilon(1e-4));
    // continuity at the rise/fall boundary
    CHECK(daily_waveform(8.4 - 1e-9, 0.3) ==
          doctest::Approx(daily_waveform(8.4 + 1e-9, 0.3)).epsilon(1e-6));
}

TEST_CASE("matrix series counts follow K*N*(N-1)") {
    auto sampler = [](std::size_t, SeededRng&) {
        TrafficProfile p;
        p.base = 10.0;
        return p;
    };
    std::vector<std::string> endpoints;
    for (int i = 0; i < 50; ++i) endpoints.push_back("E" + std::to_string(i));
    const SeededRng rng(5);
    const auto big = generate_matrix_series(endpoints, 2, sampler, 0.0, 4, rng);
    CHECK(big.size() == 4900);  // K=2, N=50

    const auto small =
        generate_matrix_series({"A", "B"}, 1, sampler, 0.0, 4, rng);
    CHECK(small.size() == 2);
}

TEST_CASE("fully shared noise makes tunnel series correlate") {
    auto sampler = [](std::size_t, SeededRng&) {
        TrafficProfile p;
        p.base = 100.0;
        p.noise_sd = 5.0;
        return p;
    };
    const SeededRng rng(17);
    const auto series = generate_matrix_series({"A", "B"}, 1, sampler, 1.0, 500, rng);
    REQUIRE(series.size() == 2);
    CHECK(correlation(series[0].second.values, series[1].second.values) >= 0.99);
}

TEST_CASE("jumps scale the level exactly from the scheduled hour onward") {
    TrafficProfile base;
    base.base = 80.0;
    base.daily_amp = 0.3;
    TrafficProfile jumped = base;
    jumped.jumps = {{100, 1.5}};
    SeededRng a(7), b(7);
    const auto plain = generate_series(base, 240, a);
    const auto with_jump = generate_series(jumped, 240, b);
    for (std::size_t t = 0; t < 240; ++t) {
        const double factor = t >= 100 ? 1.5 : 1.0;
        CHECK(with_jump.values[t] == doctest::Approx(factor * plain.values[t]).epsilon(1e-12));
    }
}

TEST_CASE("generated traffic is never negative") {
    SeededRng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        TrafficProfile p;
        p.base = rng.uniform(1.0, 50.0);
        p.daily_amp = rng.uniform(0.0, 1.5);
        p.weekly_amp = rng.uniform(0.0, 0.5);
        p.asymmetry = rng.uniform(0.0, 0.9);
        p.trend_per_hour = rng.uniform(-0.5, 0.5);
        p.noise_sd = rng.uniform(0.0, 30.0);
        SeededRng gen(1000 + trial);
        const auto ts = generate_series(p, 200, gen);
        for (double v : ts.values) CHECK(v >= 0.0);
    }
}

TEST_CASE("total traffic shows daily and weekly periodicity") {
    auto sampler = [](std::size_t i, SeededRng& r) {
        TrafficProfile p;
        p.base = 50.0 + 10.0 * static_cast<double>(i);
        p.daily_amp = 0.45;
        p.weekly_amp = 0.12;
        p.asymmetry = 0.25;
        p.noise_sd = 0.03 * p.base * (0.5 + r.uniform());
        return p;
    };
    const SeededRng rng(31);
    const auto series =
        generate_matrix_series({"A", "B", "C", "D"}, 1, sampler, 0.4, 840, rng);
    std::vector<double> total(840, 0.0);
    for (const auto& [id, ts] : series) {
        for (std::size_t t = 0; t < total.size(); ++t) total[t] += ts.values[t];
    }
    const double ac24 = autocorrelation(total, 24);
    const double ac168 = autocorrelation(total, 168);
    const double ac13 = autocorrelation(total, 13);
    CHECK(ac24 > ac13);
    CHECK(ac168 > ac13);
}

TEST_CASE("series CSV round trip preserves ids, timestamps and values") {
    auto sampler = [](std::size_t, SeededRng&) {
        TrafficProfile p;
        p.base = 42.0;
        p.daily_amp = 0.2;
        p.noise_sd = 1.0;
        return p;
    };
    const SeededRng rng(8);
    const auto series = generate_matrix_series({"A", "B"}, 1, sampler, 0.2, 48, rng);
    const std::string csv = series_to_csv(series);
    const auto parsed = series_from_csv(csv);
    REQUIRE(parsed.size() == series.size());
    CHECK(series_to_csv(parsed) == csv);
    CHECK(parsed[0].second.start_hour == series[0].second.start_hour);

    CHECK_THROWS_AS(series_from_csv("bogus header\n"), ParseError);
    CHECK_THROWS_AS(series_from_csv("timestamp,tunnel_id,value\n2025-01-06T00:00:00Z,a,zzz\n"),
                    ParseError);
}

TEST_CASE("generator config parses ranges and noise fraction") {
    const std::string cfg = R"({
        "n_endpoints": 3, "n_classes": 1, "n_hours": 24, "rho_shared": 0.5,
        "profile": {"base": [50, 150], "daily_amp": 0.5, "noise_frac_of_base": 0.03}
    })";
    const GeneratorConfig config = generator_config_from_json(cfg);
    CHECK(config.endpoints.size() == 3);
    const auto sampler = sampler_from_config(config);
    SeededRng rng(1);
    const TrafficProfile p = sampler(0, rng);
    CHECK(p.base >= 50.0);
    CHECK(p.base < 150.0);
    CHECK(p.noise_sd == doctest::Approx(0.03 * p.base));
}
