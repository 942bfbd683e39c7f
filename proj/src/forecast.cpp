#include "optiplan/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "optiplan/errors.hpp"
#include "optiplan/timeutil.hpp"

namespace optiplan::forecast {

DetrendResult detrend(const TimeSeries& series) {
    const std::size_t n = series.values.size();
    if (n < 2) throw DegenerateSeries("detrend needs at least two samples");
    // OLS on t = 0..n-1 in closed form.
    const double nn = static_cast<double>(n);
    const double t_mean = (nn - 1.0) / 2.0;
    double x_mean = 0.0;
    for (double v : series.values) x_mean += v;
    x_mean /= nn;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double dt = static_cast<double>(t) - t_mean;
        num += dt * (series.values[t] - x_mean);
        den += dt * dt;
    }
    DetrendResult out;
    out.slope = num / den;
    out.intercept = x_mean - out.slope * t_mean;
    out.residual.start_hour = series.start_hour;
    out.residual.values.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        out.residual.values[t] =
            series.values[t] - out.intercept - out.slope * static_cast<double>(t);
    }
    return out;
}

PacfResult pacf(const TimeSeries& series, std::size_t max_lag) {
    const std::size_t n = series.values.size();
    if (n <= max_lag + 1) throw InsufficientData("series too short for requested pacf lag");

    double mean = 0.0;
    for (double v : series.values) mean += v;
    mean /= static_cast<double>(n);

    // Biased autocovariances (1/n) keep the sequence positive semidefinite.
    std::vector<double> gamma(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            s += (series.values[t] - mean) * (series.values[t + k] - mean);
        }
        gamma[k] = s / static_cast<double>(n);
    }

    PacfResult out;
    out.n_samples = n;
    out.values.assign(max_lag + 1, 0.0);
    out.values[0] = 1.0;
    if (gamma[0] <= 0.0) return out;  // constant series: no correlation structure

    // Durbin-Levinson recursion; phi holds the current AR coefficients.
    std::vector<double> phi(max_lag + 1, 0.0);
    std::vector<double> prev(max_lag + 1, 0.0);
    double v = gamma[0];
    for (std::size_t k = 1; k <= max_lag; ++k) {
        if (v <= gamma[0] * 1e-14) break;  // exactly predictable at this order
        double acc = gamma[k];
        for (std::size_t j = 1; j < k; ++j) acc -= prev[j] * gamma[k - j];
        const double rho = acc / v;
        phi[k] = rho;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - rho * prev[k - j];
        v *= (1.0 - rho * rho);
        out.values[k] = rho;
        std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(k) + 1, prev.begin());
    }
    return out;
}

double lag_threshold(int horizon) {
    return std::pow(static_cast<double>(horizon), 1.0 / 6.0) / 15.0;
}

LagSet select_lags(const PacfResult& pacf_result, int horizon, int max_lag) {
    if (horizon < 1) throw Error("forecast horizon must be at least 1");
    LagSet out;
    out.horizon = horizon;
    const double threshold = lag_threshold(horizon);
    const int limit = std::min<int>(max_lag, static_cast<int>(pacf_result.values.size()) - 1);
    for (int t = horizon; t <= limit; ++t) {
        if (pacf_result.values[static_cast<std::size_t>(t)] > threshold) out.lags.push_back(t);
    }
    if (out.lags.empty()) out.lags.push_back(std::max(horizon, 24));
    return out;
}

void build_design(const TimeSeries& residual, const LagSet& lag_set, num::Matrix& x,
                  std::vector<double>& y) {
    const std::size_t n = residual.values.size();
    const int max_lag = lag_set.lags.back();
    if (n <= static_cast<std::size_t>(max_lag)) {
        throw InsufficientData("series too short for the selected lag set");
    }
    const std::size_t rows = n - static_cast<std::size_t>(max_lag);
    const std::size_t cols = lag_set.lags.size();
    x = num::Matrix(rows, cols);
    y.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = r + static_cast<std::size_t>(max_lag);
        for (std::size_t c = 0; c < cols; ++c) {
            x(r, c) = residual.values[t - static_cast<std::size_t>(lag_set.lags[c])];
        }
        y[r] = residual.values[t];
    }
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

GprModel fit_gpr(const num::Matrix& x, std::span<const double> y, double theta,
                 double noise_var) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n == 0) throw InsufficientData("gpr needs at least one training row");
    if (y.size() != n) throw DimensionMismatch("gpr target length mismatch");

    GprModel model;
    model.theta = theta;
    model.noise_var = noise_var;
    model.feat_mean.assign(d, 0.0);
    model.feat_sd.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += x(i, j);
        m /= static_cast<double>(n);
        double s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = x(i, j) - m;
            s2 += dv * dv;
        }
        const double sd = std::sqrt(s2 / static_cast<double>(n));
        model.feat_mean[j] = m;
        model.feat_sd[j] = sd > 0.0 ? sd : 1.0;
    }
    model.train_x = num::Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            model.train_x(i, j) = (x(i, j) - model.feat_mean[j]) / model.feat_sd[j];
        }
    }

    num::Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        k(i, i) = 1.0 + noise_var;
        for (std::size_t j = 0; j < i; ++j) {
            const double v =
                std::exp(-theta * squared_distance(model.train_x.row(i), model.train_x.row(j)));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    try {
        model.chol = num::cholesky(k);
    } catch (const NotPositiveDefinite&) {
        for (std::size_t i = 0; i < n; ++i) k(i, i) += 1e-10;  // one jitter retry
        model.chol = num::cholesky(k);
    }
    model.alpha = num::solve_cholesky(model.chol, y);
    return model;
}

GprPrediction gpr_predict(const GprModel& model, std::span<const double> x_query) {
    const std::size_t n = model.train_x.rows();
    const std::size_t d = model.train_x.cols();
    if (x_query.size() != d) throw DimensionMismatch("gpr query dimension mismatch");

    std::vector<double> q(d);
    for (std::size_t j = 0; j < d; ++j) {
        q[j] = (x_query[j] - model.feat_mean[j]) / model.feat_sd[j];
    }
    std::vector<double> k_star(n);
    for (std::size_t i = 0; i < n; ++i) {
        k_star[i] = std::exp(-model.theta * squared_distance(model.train_x.row(i), q));
    }
    GprPrediction out;
    out.mean = num::dot(k_star, model.alpha);
    const std::vector<double> z = num::forward_sub(model.chol, k_star);
    double explained = 0.0;
    for (double v : z) explained += v * v;
    double variance = 1.0 + model.noise_var - explained;
    if (variance < 0.0) {
        if (variance < -1e-9) {
            std::cerr << "warning: gpr posterior variance " << variance << " clamped to 0\n";
        }
        variance = 0.0;
    }
    out.variance = variance;
    return out;
}

ForecastModel fit_forecast_model(const TimeSeries& series, int horizon, int max_lag) {
    if (horizon < 1) throw Error("forecast horizon must be at least 1");
    ForecastModel model;
    model.train_len = series.values.size();
    model.start_hour = series.start_hour;

    DetrendResult trend = detrend(series);
    model.intercept = trend.intercept;
    model.slope = trend.slope;

    const std::size_t usable_lag =
        std::min<std::size_t>(static_cast<std::size_t>(max_lag), series.values.size() - 2);
    PacfResult rho = pacf(trend.residual, usable_lag);
    model.lag_set = select_lags(rho, horizon, static_cast<int>(usable_lag));

    num::Matrix x;
    std::vector<double> y;
    build_design(trend.residual, model.lag_set, x, y);
    model.gpr = fit_gpr(x, y);
    return model;
}

namespace {

// Residual of the full observed history under the model's training trend.
std::vector<double> residual_under_trend(const ForecastModel& model, const TimeSeries& series) {
    std::vector<double> res(series.values.size());
    for (std::size_t t = 0; t < res.size(); ++t) {
        res[t] = series.values[t] - model.intercept - model.slope * static_cast<double>(t);
    }
    return res;
}

Forecast predict_at(const ForecastModel& model, const std::vector<double>& residual,
                    std::size_t target_index) {
    std::vector<double> features(model.lag_set.lags.size());
    for (std::size_t c = 0; c < features.size(); ++c) {
        const std::size_t lag = static_cast<std::size_t>(model.lag_set.lags[c]);
        if (lag > target_index) throw InsufficientData("not enough history for lagged features");
        features[c] = residual[target_index - lag];
    }
    const GprPrediction p = gpr_predict(model.gpr, features);
    Forecast out;
    out.mean = p.mean + model.intercept + model.slope * static_cast<double>(target_index);
    out.ci_half_width = 2.0 * std::sqrt(p.variance);
    out.lags = model.lag_set.lags;
    return out;
}

}  // namespace

Forecast forecast(const TimeSeries& series, int horizon, int max_lag) {
    ForecastModel model = fit_forecast_model(series, horizon, max_lag);
    const std::vector<double> res = residual_under_trend(model, series);
    const std::size_t target = series.values.size() - 1 + static_cast<std::size_t>(horizon);
    // Features at target-lag are all observed because every lag >= horizon.
    std::vector<double> padded = res;
    padded.resize(target + 1, 0.0);
    return predict_at(model, padded, target);
}

std::vector<HorizonForecast> forecast_trajectory(const TimeSeries& series,
                                                 const std::vector<int>& horizons, int max_lag) {
    std::vector<HorizonForecast> out(horizons.size());
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        out[i].horizon = horizons[i];
        try {
            out[i].result = forecast(series, horizons[i], max_lag);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    }
    return out;
}

ArModel fit_ar_baseline(const TimeSeries& series, const LagSet& lag_set) {
    ArModel model;
    model.lag_set = lag_set;
    model.train_len = series.values.size();

    DetrendResult trend = detrend(series);
    model.intercept = trend.intercept;
    model.slope = trend.slope;

    num::Matrix x;
    std::vector<double> y;
    build_design(trend.residual, lag_set, x, y);

    // Normal equations on [1 X].
    const std::size_t m = x.cols() + 1;
    num::Matrix xtx(m, m);
    std::vector<double> xty(m, 0.0);
    const std::size_t rows = x.rows();
    for (std::size_t r = 0; r < rows; ++r) {
        xty[0] += y[r];
        xtx(0, 0) += 1.0;
        for (std::size_t i = 0; i < x.cols(); ++i) {
            xtx(0, i + 1) += x(r, i);
            xtx(i + 1, 0) += x(r, i);
            xty[i + 1] += x(r, i) * y[r];
            for (std::size_t j = 0; j <= i; ++j) {
                xtx(i + 1, j + 1) += x(r, i) * x(r, j);
                if (j != i) xtx(j + 1, i + 1) += x(r, i) * x(r, j);
            }
        }
    }
    try {
        model.weights = num::solve_psd(xtx, xty);
    } catch (const NotPositiveDefinite&) {
        for (std::size_t i = 0; i < m; ++i) xtx(i, i) += 1e-6;  // ridge fallback
        model.weights = num::solve_psd(xtx, xty);
        model.ridge_fallback = true;
    }
    return model;
}

namespace {

double ar_predict_residual(const ArModel& model, const std::vector<double>& residual,
                           std::size_t target_index) {
    double v = model.weights[0];
    for (std::size_t c = 0; c < model.lag_set.lags.size(); ++c) {
        const std::size_t lag = static_cast<std::size_t>(model.lag_set.lags[c]);
        v += model.weights[c + 1] * residual[target_index - lag];
    }
    return v;
}

}  // namespace

ForecastEval evaluate(std::span<const double> predictions, std::span<const double> actuals,
                      std::span<const std::int64_t> timestamps) {
    if (predictions.size() != actuals.size() || predictions.size() != timestamps.size()) {
        throw DimensionMismatch("evaluate requires aligned series");
    }
    if (predictions.empty()) throw EmptyWindow("no points to evaluate");

    std::vector<double> rel;
    std::vector<double> rel_peak;
    rel.reserve(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (!(actuals[i] > 0.0)) throw Error("relative error needs positive actuals");
        const double e = std::abs(predictions[i] - actuals[i]) / actuals[i];
        rel.push_back(e);
        const int hod = hour_of_day(timestamps[i]);
        if (hod >= 1 && hod <= 4) rel_peak.push_back(e);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    ForecastEval out;
    out.n_points = rel.size();
    out.n_peak_points = rel_peak.size();
    out.mae_overall = median(rel);
    if (rel_peak.empty()) throw EmptyWindow("no samples in the 1:00-5:00 GMT window");
    out.mae_peak = median(std::move(rel_peak));
    return out;
}

HorizonEvalResult evaluate_horizon(const TimeSeries& series, int horizon, std::size_t train_len,
                                   std::size_t n_test, ForecasterKind kind, int max_lag) {
    if (train_len < 4 || train_len > series.values.size()) {
        throw InsufficientData("bad training window");
    }
    const std::size_t first_target = train_len - 1 + static_cast<std::size_t>(horizon);
    if (first_target + n_test > series.values.size()) {
        throw InsufficientData("series too short for the requested test window");
    }

    TimeSeries train;
    train.start_hour = series.start_hour;
    train.values.assign(series.values.begin(),
                        series.values.begin() + static_cast<std::ptrdiff_t>(train_len));

    HorizonEvalResult out;
    if (kind == ForecasterKind::Gpr) {
        ForecastModel model = fit_forecast_model(train, horizon, max_lag);
        out.lags = model.lag_set.lags;
        const std::vector<double> res = residual_under_trend(model, series);
        for (std::size_t j = 0; j < n_test; ++j) {
            const std::size_t t = first_target + j;
            out.predictions.push_back(predict_at(model, res, t).mean);
            out.actuals.push_back(series.values[t]);
            out.timestamps.push_back(series.hour_at(t));
        }
    } else {
        DetrendResult trend = detrend(train);
        const std::size_t usable_lag =
            std::min<std::size_t>(static_cast<std::size_t>(max_lag), train.values.size() - 2);
        PacfResult rho = pacf(trend.residual, usable_lag);
        LagSet lag_set = select_lags(rho, horizon, static_cast<int>(usable_lag));
        ArModel model = fit_ar_baseline(train, lag_set);
        out.lags = model.lag_set.lags;
        std::vector<double> res(series.values.size());
        for (std::size_t t = 0; t < res.size(); ++t) {
            res[t] = series.values[t] - model.intercept - model.slope * static_cast<double>(t);
        }
        for (std::size_t j = 0; j < n_test; ++j) {
            const std::size_t t = first_target + j;
            const double pred = ar_predict_residual(model, res, t) + model.intercept +
                                model.slope * static_cast<double>(t);
            out.predictions.push_back(pred);
            out.actuals.push_back(series.values[t]);
            out.timestamps.push_back(series.hour_at(t));
        }
    }
    out.eval = evaluate(out.predictions, out.actuals, out.timestamps);
    return out;
}

}  // namespace optiplan::forecast
