#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "optiplan/errors.hpp"
#include "optiplan/forecast.hpp"
#include "optiplan/matrix.hpp"
#include "optiplan/rng.hpp"
#include "optiplan/traffgen.hpp"

using namespace optiplan;
using namespace optiplan::forecast;
using num::Matrix;
using num::SeededRng;

namespace {

TimeSeries make_series(std::vector<double> values, std::int64_t start = 0) {
    TimeSeries ts;
    ts.start_hour = start;
    ts.values = std::move(values);
    return ts;
}

TimeSeries ar1_series(double phi, std::size_t n, SeededRng& rng) {
    TimeSeries ts;
    ts.start_hour = 0;
    double x = 0.0;
    for (std::size_t burn = 0; burn < 200; ++burn) x = phi * x + rng.normal();
    ts.values.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        x = phi * x + rng.normal();
        ts.values.push_back(x);
    }
    return ts;
}

// Direct Toeplitz solve of the Yule-Walker system; the independent oracle for
// the Durbin-Levinson recursion (the PACF at lag t is the last coefficient of
// the order-t autoregressive fit).
double pacf_by_direct_solve(const std::vector<double>& x, int lag) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> gamma(static_cast<std::size_t>(lag) + 1, 0.0);
    for (int k = 0; k <= lag; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(k) < n; ++t) {
            s += (x[t] - mean) * (x[t + static_cast<std::size_t>(k)] - mean);
        }
        gamma[static_cast<std::size_t>(k)] = s / static_cast<double>(n);
    }
    Matrix toeplitz(static_cast<std::size_t>(lag), static_cast<std::size_t>(lag));
    std::vector<double> rhs(static_cast<std::size_t>(lag));
    for (int i = 0; i < lag; ++i) {
        rhs[static_cast<std::size_t>(i)] = gamma[static_cast<std::size_t>(i) + 1];
        for (int j = 0; j < lag; ++j) {
            toeplitz(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                gamma[static_cast<std::size_t>(std::abs(i - j))];
        }
    }
    const auto phi = num::solve_psd(toeplitz, rhs);
    return phi.back();
}

}  // namespace

TEST_CASE("detrend recovers constants, lines and trends in noise") {
    {
        const auto r = detrend(make_series(std::vector<double>(50, 3.0)));
        CHECK(r.intercept == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(r.slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        for (double v : r.residual.values) CHECK(std::abs(v) < 1e-9);
    }
    {
        std::vector<double> line(100);
        for (std::size_t t = 0; t < line.size(); ++t) line[t] = 2.0 * static_cast<double>(t);
        const auto r = detrend(make_series(line));
        CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-12));
        for (double v : r.residual.values) CHECK(std::abs(v) < 1e-9);
    }
    {
        std::vector<double> wave(500);
        for (std::size_t t = 0; t < wave.size(); ++t) {
            wave[t] = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 24.0) +
                      0.5 * static_cast<double>(t);
        }
        const auto r = detrend(make_series(wave));
        CHECK(r.slope >= 0.45);
        CHECK(r.slope <= 0.55);
    }
    CHECK_THROWS_AS(detrend(make_series({1.0})), DegenerateSeries);
}

TEST_CASE("pacf starts at 1 and needs enough data") {
    SeededRng rng(1);
    TimeSeries ts = ar1_series(0.5, 300, rng);
    const auto rho = pacf(ts, 20);
    CHECK(rho.values[0] == 1.0);
    CHECK(rho.values.size() == 21);
    for (double v : rho.values) CHECK(std::abs(v) <= 1.0 + 1e-9);
    CHECK_THROWS_AS(pacf(make_series({1.0, 2.0, 3.0}), 5), InsufficientData);
}

TEST_CASE("pacf of AR(1) with phi=0.8 is a single spike") {
    SeededRng rng(42);
    const TimeSeries ts = ar1_series(0.8, 5000, rng);
    const auto rho = pacf(ts, 10);
    CHECK(rho.values[1] >= 0.77);
    CHECK(rho.values[1] <= 0.83);
    CHECK(std::abs(rho.values[2]) < 0.05);
}

TEST_CASE("pacf equals the direct Yule-Walker solve") {
    SeededRng rng(7);
    TimeSeries ts = ar1_series(0.6, 800, rng);
    // add some seasonal structure so higher lags are non-trivial
    for (std::size_t t = 0; t < ts.values.size(); ++t) {
        ts.values[t] += 0.8 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 24.0);
    }
    const auto rho = pacf(ts, 30);
    for (int lag : {1, 2, 5, 12, 24, 30}) {
        CHECK(rho.values[static_cast<std::size_t>(lag)] ==
              doctest::Approx(pacf_by_direct_solve(ts.values, lag)).epsilon(1e-6));
    }
}

TEST_CASE("white-noise pacf false-positive rate stays under 1% of lag tests") {
    // ~0.27% of (seed, lag) pairs are expected outside the 3/sqrt(n) band.
    const std::size_t n = 2000;
    const double band = 3.0 / std::sqrt(static_cast<double>(n));
    int flagged = 0;
    int total = 0;
    for (int seed = 0; seed < 100; ++seed) {
        SeededRng rng(static_cast<std::uint64_t>(seed) + 500);
        TimeSeries ts;
        ts.values = num::normal_samples(rng, n);
        const auto rho = pacf(ts, 60);
        for (int lag = 1; lag <= 60; ++lag) {
            ++total;
            if (std::abs(rho.values[static_cast<std::size_t>(lag)]) >= band) ++flagged;
        }
    }
    CHECK(total == 6000);
    CHECK(static_cast<double>(flagged) / static_cast<double>(total) <= 0.01);
}

TEST_CASE("lag threshold anchors from the selection rule") {
    CHECK(lag_threshold(1) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
    CHECK(std::abs(lag_threshold(1) - 0.06667) < 5e-6);
    CHECK(std::abs(lag_threshold(168) - 0.1566) < 5e-5);
}

TEST_CASE("select_lags keeps qualifying lags and falls back to max(a_T, 24)") {
    PacfResult rho;
    rho.values.assign(61, 0.0);
    rho.values[0] = 1.0;
    rho.values[24] = 0.5;
    rho.values[25] = 0.12;
    rho.values[48] = 0.2;
    {
        const LagSet lags = select_lags(rho, 24, 60);
        CHECK(lags.lags == std::vector<int>{24, 25, 48});
    }
    {
        // a_T = 30: window starts at 30 and the threshold rises; only 48 stays
        const LagSet lags = select_lags(rho, 30, 60);
        CHECK(lags.lags == std::vector<int>{48});
    }
    {
        PacfResult flat;
        flat.values.assign(61, 0.0);
        flat.values[0] = 1.0;
        CHECK(select_lags(flat, 6, 60).lags == std::vector<int>{24});
        CHECK(select_lags(flat, 30, 60).lags == std::vector<int>{30});
    }
}

TEST_CASE("lag count is monotone non-increasing in the horizon") {
    SeededRng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        PacfResult rho;
        rho.values.resize(169);
        rho.values[0] = 1.0;
        for (std::size_t t = 1; t < rho.values.size(); ++t) {
            rho.values[t] = rng.uniform(-0.2, 0.35);
        }
        std::size_t prev = SIZE_MAX;
        for (int horizon : {1, 2, 6, 24, 72, 168}) {
            const std::size_t count = select_lags(rho, horizon, 168).lags.size();
            CHECK(count <= prev);
            prev = count;
        }
    }
}

TEST_CASE("build_design row counts and alignment") {
    Matrix x;
    std::vector<double> y;
    {
        std::vector<double> v(10);
        for (std::size_t t = 0; t < 10; ++t) v[t] = static_cast<double>(t) * 10.0;
        build_design(make_series(v), {{1}, 1}, x, y);
        CHECK(x.rows() == 9);
        build_design(make_series(v), {{1, 2}, 1}, x, y);
        CHECK(x.rows() == 8);
        CHECK(y[0] == 20.0);     // row 0 targets x_2
        CHECK(x(0, 0) == 10.0);  // lag 1 -> x_1
        CHECK(x(0, 1) == 0.0);   // lag 2 -> x_0
    }
    {
        std::vector<double> v(200);
        for (std::size_t t = 0; t < 200; ++t) v[t] = std::sin(0.3 * static_cast<double>(t));
        build_design(make_series(v), {{24}, 24}, x, y);
        CHECK(x.rows() == 176);
        // spot-check alignment by hand indexing
        for (std::size_t r : {std::size_t{0}, std::size_t{50}, std::size_t{175}}) {
            CHECK(y[r] == v[r + 24]);
            CHECK(x(r, 0) == v[r]);
        }
    }
    CHECK_THROWS_AS(build_design(make_series({1.0, 2.0}), {{24}, 24}, x, y), InsufficientData);
}

TEST_CASE("no-leakage: every feature is at least a_T hours older than its target") {
    SeededRng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const int horizon = 1 + static_cast<int>(rng.below(48));
        std::vector<int> lags;
        int lag = horizon + static_cast<int>(rng.below(4));
        while (lags.size() < 4) {
            lags.push_back(lag);
            lag += 1 + static_cast<int>(rng.below(30));
        }
        std::vector<double> v(400);
        for (auto& val : v) val = rng.normal();
        Matrix x;
        std::vector<double> y;
        build_design(make_series(v), {lags, horizon}, x, y);
        const int max_lag = lags.back();
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const int t = static_cast<int>(r) + max_lag;
            CHECK(y[r] == v[static_cast<std::size_t>(t)]);
            for (std::size_t c = 0; c < lags.size(); ++c) {
                const int feature_time = t - lags[c];
                CHECK(feature_time <= t - horizon);
                CHECK(x(r, c) == v[static_cast<std::size_t>(feature_time)]);
            }
        }
    }
}

TEST_CASE("gpr single training point reproduces the closed form y/(1+noise)") {
    Matrix x(1, 1, {2.5});
    const std::vector<double> y{4.0};
    const GprModel model = fit_gpr(x, y);  // theta 0.01, noise 0.01
    const auto p = gpr_predict(model, std::vector<double>{2.5});
    CHECK(p.mean == doctest::Approx(4.0 / 1.01).epsilon(1e-12));
    CHECK(p.mean == doctest::Approx(0.99010 * 4.0).epsilon(1e-4));
}

TEST_CASE("gpr mean far from all training points decays to the zero prior") {
    SeededRng rng(3);
    Matrix x(5, 1);
    std::vector<double> y(5);
    for (std::size_t i = 0; i < 5; ++i) {
        x(i, 0) = static_cast<double>(i);
        y[i] = rng.normal();
    }
    const GprModel model = fit_gpr(x, y);
    const auto p = gpr_predict(model, std::vector<double>{1e6});
    CHECK(std::abs(p.mean) < 1e-9);
    CHECK(p.variance == doctest::Approx(1.0 + 0.01).epsilon(1e-9));
}

TEST_CASE("gpr posterior mean matches an explicit matrix-inverse computation") {
    SeededRng rng(11);
    const std::size_t n = 5, d = 2;
    Matrix x(n, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) x(i, j) = rng.normal();
        y[i] = rng.normal();
    }
    const double theta = 0.01, noise = 0.01;
    const GprModel model = fit_gpr(x, y, theta, noise);

    // oracle: standardize the same way, then mean = k (K + nI)^{-1} y with an
    // explicit Gauss-Jordan inverse
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) mean[j] += x(i, j);
        mean[j] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            sd[j] += (x(i, j) - mean[j]) * (x(i, j) - mean[j]);
        }
        sd[j] = std::sqrt(sd[j] / static_cast<double>(n));
    }
    auto std_row = [&](std::span<const double> row) {
        std::vector<double> out(d);
        for (std::size_t j = 0; j < d; ++j) out[j] = (row[j] - mean[j]) / sd[j];
        return out;
    };
    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ri = std_row(x.row(i));
        for (std::size_t j = 0; j < n; ++j) {
            const auto rj = std_row(x.row(j));
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += (ri[c] - rj[c]) * (ri[c] - rj[c]);
            k(i, j) = std::exp(-theta * s) + (i == j ? noise : 0.0);
        }
    }
    // Gauss-Jordan inverse
    Matrix inv = Matrix::identity(n);
    Matrix a = k;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        }
        for (std::size_t c = 0; c < n; ++c) {
            std::swap(a(pivot, c), a(col, c));
            std::swap(inv(pivot, c), inv(col, c));
        }
        const double p = a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) /= p;
            inv(col, c) /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    const std::vector<double> query{0.3, -0.2};
    const auto q = std_row(query);
    std::vector<double> k_star(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ri = std_row(x.row(i));
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += (ri[c] - q[c]) * (ri[c] - q[c]);
        k_star[i] = std::exp(-theta * s);
    }
    const auto inv_y = num::mat_vec(inv, y);
    double oracle_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) oracle_mean += k_star[i] * inv_y[i];

    const auto p = gpr_predict(model, query);
    CHECK(p.mean == doctest::Approx(oracle_mean).epsilon(1e-8));
}

TEST_CASE("gpr interpolates at training points when the noise is tiny") {
    SeededRng rng(17);
    const std::size_t n = 30;
    Matrix x(n, 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = static_cast<double>(i) / 3.0;
        y[i] = std::sin(x(i, 0));
    }
    const GprModel model = fit_gpr(x, y, 0.5, 1e-8);
    for (std::size_t i = 0; i < n; i += 7) {
        const auto p = gpr_predict(model, x.row(i));
        CHECK(std::abs(p.mean - y[i]) < 1e-3);
        CHECK(p.variance <= 1e-8 + 1e-6);
    }
}

TEST_CASE("gpr posterior mean is linear in the training targets") {
    SeededRng rng(23);
    Matrix x(20, 2);
    std::vector<double> y(20), y3(20);
    for (std::size_t i = 0; i < 20; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        y[i] = rng.normal();
        y3[i] = 3.0 * y[i];
    }
    const GprModel m1 = fit_gpr(x, y);
    const GprModel m3 = fit_gpr(x, y3);
    for (int trial = 0; trial < 5; ++trial) {
        const std::vector<double> q{rng.normal(), rng.normal()};
        CHECK(gpr_predict(m3, q).mean ==
              doctest::Approx(3.0 * gpr_predict(m1, q).mean).epsilon(1e-9));
    }
}

TEST_CASE("gpr 2-sigma credible intervals cover at least 90% of fresh targets") {
    SeededRng rng(31);
    const std::size_t n_train = 300, n_test = 300;
    auto truth = [](double a, double b) { return std::sin(1.5 * a) + 0.5 * std::cos(b); };
    Matrix x(n_train, 2);
    std::vector<double> y(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
        x(i, 0) = rng.uniform(-2.0, 2.0);
        x(i, 1) = rng.uniform(-2.0, 2.0);
        y[i] = truth(x(i, 0), x(i, 1)) + 0.1 * rng.normal();
    }
    const GprModel model = fit_gpr(x, y, 0.5, 0.01);  // noise_var matches the 0.1 sd
    std::size_t covered = 0;
    for (std::size_t i = 0; i < n_test; ++i) {
        const std::vector<double> q{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        const double target = truth(q[0], q[1]) + 0.1 * rng.normal();
        const auto p = gpr_predict(model, q);
        if (std::abs(target - p.mean) <= 2.0 * std::sqrt(p.variance)) ++covered;
    }
    CHECK(static_cast<double>(covered) / static_cast<double>(n_test) >= 0.90);
}

TEST_CASE("forecast of a constant series is the constant") {
    const TimeSeries ts = make_series(std::vector<double>(400, 7.5));
    const Forecast f = forecast::forecast(ts, 24);
    CHECK(f.mean == doctest::Approx(7.5).epsilon(1e-6));
}

TEST_CASE("forecast of a pure linear series extrapolates the trend") {
    std::vector<double> v(400);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = 5.0 + 0.25 * static_cast<double>(t);
    const Forecast f = forecast::forecast(make_series(v), 24);
    const double expected = 5.0 + 0.25 * static_cast<double>(v.size() - 1 + 24);
    CHECK(f.mean == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("forecast tracks a generated daily oscillation to within 5%") {
    traffic::TrafficProfile p;
    p.base = 100.0;
    p.daily_amp = 0.5;
    p.weekly_amp = 0.1;
    p.asymmetry = 0.3;
    p.noise_sd = 3.0;
    SeededRng rng(77);
    const TimeSeries full = traffic::generate_series(p, 2160 + 24, rng);
    TimeSeries train;
    train.start_hour = full.start_hour;
    train.values.assign(full.values.begin(), full.values.end() - 24);
    const Forecast f = forecast::forecast(train, 24);
    const double actual = full.values.back();
    CHECK(std::abs(f.mean - actual) / actual < 0.05);
}

TEST_CASE("forecast_trajectory: constants, consistency and error capture") {
    const TimeSeries constant = make_series(std::vector<double>(400, 3.0));
    std::vector<int> horizons;
    for (int h = 1; h <= 96; ++h) horizons.push_back(h);
    const auto traj = forecast_trajectory(constant, horizons);
    CHECK(traj.size() == 96);
    for (const auto& h : traj) {
        REQUIRE(h.result.has_value());
        CHECK(h.result->mean == doctest::Approx(3.0).epsilon(1e-6));
    }

    SeededRng rng(13);
    TimeSeries noisy = ar1_series(0.5, 600, rng);
    for (auto& v : noisy.values) v += 50.0;
    const auto single = forecast_trajectory(noisy, {24});
    REQUIRE(single.size() == 1);
    REQUIRE(single[0].result.has_value());
    CHECK(single[0].result->mean == doctest::Approx(forecast::forecast(noisy, 24).mean).epsilon(1e-12));

    // a horizon the series cannot support is recorded, not fatal
    const auto mixed = forecast_trajectory(make_series(std::vector<double>(30, 1.0)), {1, 600});
    CHECK(mixed[1].result.has_value() == false);
    CHECK(!mixed[1].error.empty());
}

TEST_CASE("ar baseline recovers an AR(1) coefficient") {
    SeededRng rng(21);
    const TimeSeries ts = ar1_series(0.7, 4000, rng);
    const ArModel model = fit_ar_baseline(ts, {{1}, 1});
    CHECK(model.weights[1] >= 0.65);
    CHECK(model.weights[1] <= 0.75);
}

TEST_CASE("ar baseline on white noise finds no structure") {
    SeededRng rng(29);
    TimeSeries ts;
    ts.values = num::normal_samples(rng, 5000);
    const ArModel model = fit_ar_baseline(ts, {{1, 2, 3}, 1});
    for (std::size_t i = 1; i < model.weights.size(); ++i) {
        CHECK(std::abs(model.weights[i]) < 0.05);
    }
}

TEST_CASE("ar baseline is deterministic and falls back to ridge when degenerate") {
    SeededRng rng(33);
    const TimeSeries ts = ar1_series(0.4, 500, rng);
    const ArModel a = fit_ar_baseline(ts, {{1, 5}, 1});
    const ArModel b = fit_ar_baseline(ts, {{1, 5}, 1});
    CHECK(a.weights == b.weights);

    // duplicated lag column makes the normal equations singular
    const TimeSeries tiny = make_series({1.0, 2.0, 1.5, 2.5, 1.8, 2.2, 1.9, 2.4});
    const ArModel degenerate = fit_ar_baseline(tiny, {{1, 1}, 1});
    CHECK(degenerate.ridge_fallback);
}

TEST_CASE("evaluate: exact predictions, uniform bias and a hand median") {
    std::vector<std::int64_t> stamps{1, 2, 3, 4, 5};
    std::vector<double> actual{10.0, 20.0, 30.0, 40.0, 50.0};
    {
        const auto e = evaluate(actual, actual, stamps);
        CHECK(e.mae_overall == 0.0);
        CHECK(e.mae_peak == 0.0);
    }
    {
        std::vector<double> pred(actual);
        for (auto& v : pred) v *= 1.1;
        const auto e = evaluate(pred, actual, stamps);
        CHECK(e.mae_overall == doctest::Approx(0.10).epsilon(1e-12));
        CHECK(e.mae_peak == doctest::Approx(0.10).epsilon(1e-12));
    }
    {
        // relative errors: 0.05, 0.40, 0.10, 0.00, 0.20 -> median 0.10
        std::vector<double> pred{10.5, 28.0, 33.0, 40.0, 60.0};
        const auto e = evaluate(pred, actual, stamps);
        CHECK(e.mae_overall == doctest::Approx(0.10).epsilon(1e-12));
    }
}

TEST_CASE("evaluate peak window keeps only 1:00-4:59 GMT and can be empty") {
    // hours 1..4 are peak; hour 6 is not
    std::vector<std::int64_t> stamps{25, 26, 30};  // 01:00, 02:00, 06:00 next day
    std::vector<double> actual{100.0, 100.0, 100.0};
    std::vector<double> pred{101.0, 103.0, 150.0};
    const auto e = evaluate(pred, actual, stamps);
    CHECK(e.n_peak_points == 2);
    CHECK(e.mae_peak == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(e.mae_overall == doctest::Approx(0.03).epsilon(1e-12));

    std::vector<std::int64_t> off_peak{6, 7, 8};
    CHECK_THROWS_AS(evaluate(pred, actual, off_peak), EmptyWindow);
    CHECK_THROWS_AS(evaluate({}, {}, {}), EmptyWindow);
}

TEST_CASE("gpr beats the linear AR baseline on an asymmetric daily pattern") {
    // smoke-scale version of the 20-seed acceptance comparison
    traffic::TrafficProfile p;
    p.base = 100.0;
    p.daily_amp = 0.5;
    p.weekly_amp = 0.1;
    p.asymmetry = 0.3;
    p.noise_sd = 3.0;
    int gpr_wins = 0;
    for (std::uint64_t seed : {101, 202}) {
        SeededRng rng(seed);
        const TimeSeries series = traffic::generate_series(p, 1440 + 24 + 96, rng);
        const auto g = evaluate_horizon(series, 24, 1440, 96, ForecasterKind::Gpr);
        const auto a = evaluate_horizon(series, 24, 1440, 96, ForecasterKind::LinearAr);
        CHECK(g.eval.mae_overall < 0.05);
        if (g.eval.mae_overall <= a.eval.mae_overall) ++gpr_wins;
    }
    CHECK(gpr_wins >= 1);
}
