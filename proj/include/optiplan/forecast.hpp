#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "optiplan/matrix.hpp"
#include "optiplan/timeseries.hpp"

namespace optiplan::forecast {

struct DetrendResult {
    TimeSeries residual;
    double intercept = 0.0;  // b
    double slope = 0.0;      // c, per hour
};

/// Ordinary least squares line over t = 0..N-1; residual_t = x_t - b - c*t.
DetrendResult detrend(const TimeSeries& series);

struct PacfResult {
    /// values[t] is the partial autocorrelation at lag t; values[0] == 1.
    std::vector<double> values;
    std::size_t n_samples = 0;
};

/// Partial autocorrelation by the Durbin-Levinson recursion on biased sample
/// autocovariances. The caller de-trends first. A constant series yields
/// zeros beyond lag 0.
PacfResult pacf(const TimeSeries& series, std::size_t max_lag);

struct LagSet {
    std::vector<int> lags;  // strictly increasing, all >= horizon
    int horizon = 1;        // a_T
};

/// Lag-selection rule: keep lags t in [a_T, max_lag] with pacf[t] >
/// a_T^(1/6)/15; fall back to {max(a_T, 24)} when nothing qualifies.
LagSet select_lags(const PacfResult& pacf_result, int horizon, int max_lag);

double lag_threshold(int horizon);

/// Lagged design matrix: one row per t in [max(lags), N), features
/// (x_{t-a_1}, ..., x_{t-a_M}), target x_t.
void build_design(const TimeSeries& residual, const LagSet& lag_set, num::Matrix& x,
                  std::vector<double>& y);

/// Gaussian process regression state with a squared-exponential kernel
/// K_ij = exp(-theta * |x_i - x_j|^2) on per-feature standardized inputs.
/// Targets are used raw (zero prior mean), which is exact for de-trended
/// residuals.
struct GprModel {
    num::Matrix train_x;  // standardized
    std::vector<double> feat_mean;
    std::vector<double> feat_sd;
    num::Matrix chol;  // lower factor of K + noise_var*I
    std::vector<double> alpha;
    double theta = 0.01;
    double noise_var = 0.01;
};

GprModel fit_gpr(const num::Matrix& x, std::span<const double> y, double theta = 0.01,
                 double noise_var = 0.01);

struct GprPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

GprPrediction gpr_predict(const GprModel& model, std::span<const double> x_query);

struct ForecastModel {
    double intercept = 0.0;
    double slope = 0.0;
    LagSet lag_set;
    GprModel gpr;
    std::size_t train_len = 0;
    std::int64_t start_hour = 0;
};

/// Full pipeline: detrend -> pacf -> select_lags -> build_design -> fit_gpr.
ForecastModel fit_forecast_model(const TimeSeries& series, int horizon, int max_lag = 168);

struct Forecast {
    double mean = 0.0;
    double ci_half_width = 0.0;  // 2 standard deviations
    std::vector<int> lags;
};

/// Point forecast for hour (last observed + horizon).
Forecast forecast(const TimeSeries& series, int horizon, int max_lag = 168);

struct HorizonForecast {
    int horizon = 0;
    std::optional<Forecast> result;
    std::string error;  // set when this horizon failed
};

/// Independent model per horizon; per-horizon failures are recorded and do
/// not abort the remaining horizons.
std::vector<HorizonForecast> forecast_trajectory(const TimeSeries& series,
                                                 const std::vector<int>& horizons,
                                                 int max_lag = 168);

/// Linear AR baseline: ordinary least squares (intercept included) on the
/// same lagged design, same trend handling. Falls back to a ridge penalty of
/// 1e-6 when the normal equations are not positive definite.
struct ArModel {
    double intercept = 0.0;  // trend b
    double slope = 0.0;      // trend c
    LagSet lag_set;
    std::vector<double> weights;  // bias first, then one per lag
    std::size_t train_len = 0;
    bool ridge_fallback = false;
};

ArModel fit_ar_baseline(const TimeSeries& series, const LagSet& lag_set);

struct ForecastEval {
    double mae_overall = 0.0;  // median of |pred-actual|/actual
    double mae_peak = 0.0;     // restricted to GMT hours 1-4
    std::size_t n_points = 0;
    std::size_t n_peak_points = 0;
};

/// Relative median absolute error, overall and over the 1:00-5:00 GMT peak
/// window. Timestamps are epoch hours aligned with the predictions.
ForecastEval evaluate(std::span<const double> predictions, std::span<const double> actuals,
                      std::span<const std::int64_t> timestamps);

enum class ForecasterKind { Gpr, LinearAr };

struct HorizonEvalResult {
    ForecastEval eval;
    std::vector<double> predictions;
    std::vector<double> actuals;
    std::vector<std::int64_t> timestamps;
    std::vector<int> lags;
};

/// Train-then-roll protocol: fit on the first train_len hours, then predict
/// each of n_test consecutive targets starting at index train_len-1+horizon
/// (features come from observed history only, all at least `horizon` hours
/// old, so the train/test gap is honored).
HorizonEvalResult evaluate_horizon(const TimeSeries& series, int horizon,
                                   std::size_t train_len, std::size_t n_test,
                                   ForecasterKind kind, int max_lag = 168);

}  // namespace optiplan::forecast
