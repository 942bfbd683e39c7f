#include "optiplan/qot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "optiplan/errors.hpp"

using nlohmann::json;

namespace optiplan::qot {

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {
        "data_rate",      "fiber_type",          "frequency_thz", "path_length_km",
        "margin_db",      "fiber_loss_db",       "measurement_age_days",
        "n_amplifiers",   "n_passthrough_roadms", "orl_db",        "osnr_db",
        "pmd_ps",         "aux_1",               "aux_2",         "aux_3",
        "aux_4",          "aux_5",               "aux_6",         "aux_7",
        "aux_8",          "aux_9",               "aux_10",        "aux_11",
        "aux_12",         "aux_13",              "aux_14"};
    return names;
}

int feature_index(const std::string& name) {
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    throw SchemaMismatch("unknown feature '" + name + "'");
}

// ---------------------------------------------------------------------------
// OSNR

double span_osnr(double launch_power_dbm, double span_loss_db, double amp_noise_figure_db) {
    return 58.0 + launch_power_dbm - span_loss_db - amp_noise_figure_db;
}

double combine_path_osnr(std::span<const double> span_osnrs_db) {
    if (span_osnrs_db.empty()) throw EmptyPath("cannot combine OSNR over an empty path");
    double linear_noise = 0.0;
    for (double o : span_osnrs_db) linear_noise += std::pow(10.0, -o / 10.0);
    return -10.0 * std::log10(linear_noise);
}

// ---------------------------------------------------------------------------
// synthetic dataset

namespace {

enum Col {
    kDataRate = 0,
    kFiberType,
    kFrequency,
    kPathLength,
    kMargin,
    kFiberLoss,
    kAge,
    kAmplifiers,
    kRoadms,
    kOrl,
    kOsnr,
    kPmd,
    kAux1,
};

}  // namespace

double planted_label(std::span<const double> record) {
    if (record.size() != static_cast<std::size_t>(kNumFeatures)) {
        throw SchemaMismatch("wavelength record must have 26 features");
    }
    const double rate_high = record[kDataRate] >= 70.0 ? 1.0 : 0.0;  // 100G vs 40G
    const double length = record[kPathLength];
    const double osnr = record[kOsnr];
    const double freq = record[kFrequency];

    double g = -11.5;
    g += 2.3 * rate_high;
    g += 3.2 * std::pow(std::max(0.0, length) / 2500.0, 1.25);
    g += 1.9 * std::tanh((17.0 - osnr) / 3.5);
    g += 0.45 * std::sin(2.0 * std::numbers::pi * (freq - 191.3) / 4.8);
    g += 0.9 * rate_high * (length / 2500.0);
    // weak contributions from the remaining measurements
    g += 0.05 * std::tanh((record[kFiberLoss] - 0.2 * length - 3.0) / 3.0);
    g += -0.05 * (record[kMargin] - 3.0);
    g += 0.02 * record[kPmd];
    g += 0.015 * record[kRoadms];
    g += 0.0002 * record[kAge];
    g += 0.05 * std::tanh(record[kAux1]);
    return g;
}

QotDataset synth_qot_dataset(std::size_t n, num::SeededRng& rng, double label_noise_sd) {
    if (n < 10) throw Error("synthetic dataset needs at least 10 samples");
    QotDataset ds;
    ds.provenance = "synthetic";
    ds.x = num::Matrix(n, kNumFeatures);
    ds.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = ds.x.row(i);
        row[kDataRate] = rng.uniform() < 0.5 ? 40.0 : 100.0;
        row[kFiberType] = static_cast<double>(rng.below(3));
        row[kFrequency] = rng.uniform(191.3, 196.1);
        const double length = rng.uniform(100.0, 2500.0);
        row[kPathLength] = length;
        row[kMargin] = 3.0 + 0.8 * rng.normal();
        row[kFiberLoss] = std::max(0.0, 0.2 * length + 3.0 + 2.0 * rng.normal());
        row[kAge] = rng.uniform(0.0, 365.0);
        const double n_amp = std::max(0.0, std::round(length / 85.0 - 1.0 + 1.5 * rng.normal()));
        row[kAmplifiers] = n_amp;
        row[kRoadms] = std::max(0.0, std::round(length / 400.0 + rng.uniform(0.0, 2.0)));
        row[kOrl] = 30.0 + 3.0 * rng.normal();
        // OSNR from per-section estimates combined along the path.
        const int sections = static_cast<int>(n_amp) + 1;
        std::vector<double> section_osnrs(static_cast<std::size_t>(sections));
        for (auto& o : section_osnrs) {
            const double launch = 0.7 * rng.normal();
            const double loss =
                std::max(3.0, 0.2 * length / sections + 1.0 * rng.normal());
            const double nf = 5.0 + 0.4 * rng.normal();
            o = span_osnr(launch, loss, nf);
        }
        row[kOsnr] = combine_path_osnr(section_osnrs);
        row[kPmd] = 0.045 * std::sqrt(length) * (0.8 + 0.4 * rng.uniform());
        row[kAux1 + 0] = rng.normal();
        row[kAux1 + 1] = rng.normal();
        row[kAux1 + 2] = rng.normal();
        row[kAux1 + 3] = rng.normal();
        row[kAux1 + 4] = rng.normal();
        row[kAux1 + 5] = rng.uniform();
        row[kAux1 + 6] = rng.uniform();
        row[kAux1 + 7] = rng.uniform();
        row[kAux1 + 8] = rng.uniform();
        row[kAux1 + 9] = rng.uniform();
        row[kAux1 + 10] = std::abs(rng.normal());
        row[kAux1 + 11] = rng.uniform(-1.0, 1.0);
        row[kAux1 + 12] = 2.0 * rng.normal();
        row[kAux1 + 13] = 1.0;  // reserved constant slot

        const double label = planted_label(row) + label_noise_sd * rng.normal();
        ds.y[i] = std::clamp(label, -15.0, -2.0);
    }
    ds.x.check_finite();
    return ds;
}

// ---------------------------------------------------------------------------
// unified model

std::string family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::Ridge: return "ridge";
        case ModelFamily::Lasso: return "lasso";
        case ModelFamily::QuadLasso: return "quad_lasso";
        case ModelFamily::Gpr: return "gpr";
        case ModelFamily::Tree: return "tree";
        case ModelFamily::Forest: return "random_forest";
        case ModelFamily::Gbt: return "gbt";
    }
    return "unknown";
}

ModelFamily family_from_name(const std::string& name) {
    for (ModelFamily f : {ModelFamily::Ridge, ModelFamily::Lasso, ModelFamily::QuadLasso,
                          ModelFamily::Gpr, ModelFamily::Tree, ModelFamily::Forest,
                          ModelFamily::Gbt}) {
        if (family_name(f) == name) return f;
    }
    throw SchemaMismatch("unknown model family '" + name + "'");
}

double AnyModel::predict(std::span<const double> record) const {
    if (record.size() != static_cast<std::size_t>(n_features_in)) {
        throw SchemaMismatch("record has " + std::to_string(record.size()) +
                             " features, model expects " + std::to_string(n_features_in));
    }
    std::vector<double> selected;
    std::span<const double> input = record;
    if (!feature_indices.empty()) {
        selected.reserve(feature_indices.size());
        for (int idx : feature_indices) selected.push_back(record[static_cast<std::size_t>(idx)]);
        input = selected;
    }
    switch (family) {
        case ModelFamily::Ridge:
        case ModelFamily::Lasso:
        case ModelFamily::QuadLasso:
            return linear.predict(input);
        case ModelFamily::Gpr:
            return forecast::gpr_predict(gpr, input).mean + gpr_y_mean;
        case ModelFamily::Tree:
            return tree.predict(input);
        case ModelFamily::Forest:
            return forest.predict(input);
        case ModelFamily::Gbt:
            return gbt.predict(input);
    }
    throw Error("unhandled model family");
}

AnyModel fit_any(ModelFamily family, const num::Matrix& x, std::span<const double> y,
                 const Hyperparams& params, num::SeededRng& rng, std::size_t gpr_train_cap) {
    AnyModel model;
    model.family = family;
    model.params = params;
    model.n_features_in = static_cast<int>(x.cols());
    switch (family) {
        case ModelFamily::Ridge:
            model.linear = fit_ridge(x, y, params.lambda);
            break;
        case ModelFamily::Lasso:
            model.linear = fit_lasso(x, y, params.lambda);
            break;
        case ModelFamily::QuadLasso:
            model.linear = fit_quad_lasso(x, y, params.lambda);
            break;
        case ModelFamily::Gpr: {
            // GPR cost is cubic in rows; subsample deterministically past the cap.
            const std::size_t n = x.rows();
            const std::size_t use = std::min(n, gpr_train_cap);
            num::Matrix xs;
            std::vector<double> ys;
            if (use < n) {
                std::vector<std::size_t> idx(n);
                std::iota(idx.begin(), idx.end(), 0);
                for (std::size_t i = 0; i < use; ++i) {
                    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
                    std::swap(idx[i], idx[j]);
                }
                xs = num::Matrix(use, x.cols());
                ys.resize(use);
                for (std::size_t i = 0; i < use; ++i) {
                    for (std::size_t c = 0; c < x.cols(); ++c) xs(i, c) = x(idx[i], c);
                    ys[i] = y[idx[i]];
                }
            } else {
                xs = x;
                ys.assign(y.begin(), y.end());
            }
            model.gpr_y_mean =
                std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
            for (auto& v : ys) v -= model.gpr_y_mean;
            model.gpr = forecast::fit_gpr(xs, ys, params.theta, params.noise_var);
            break;
        }
        case ModelFamily::Tree:
            model.tree = fit_tree(x, y, params.max_depth, params.min_leaf);
            break;
        case ModelFamily::Forest:
            model.forest = fit_random_forest(x, y, params.n_trees, params.feature_frac,
                                             params.bootstrap, rng, params.max_depth,
                                             params.min_leaf);
            break;
        case ModelFamily::Gbt:
            model.gbt = fit_gbt(x, y, params.n_stages, params.learning_rate, params.max_depth,
                                params.min_leaf);
            break;
    }
    return model;
}

// ---------------------------------------------------------------------------
// evaluation harness

std::vector<ModelSpec> default_model_specs() {
    return {
        {ModelFamily::Ridge, 8, std::nullopt},   {ModelFamily::Lasso, 8, std::nullopt},
        {ModelFamily::QuadLasso, 4, std::nullopt}, {ModelFamily::Gpr, 3, std::nullopt},
        {ModelFamily::Gbt, 3, std::nullopt},     {ModelFamily::Forest, 3, std::nullopt},
    };
}

namespace {

Hyperparams sample_hyperparams(ModelFamily family, num::SeededRng& rng) {
    Hyperparams p;
    switch (family) {
        case ModelFamily::Ridge:
        case ModelFamily::Lasso:
        case ModelFamily::QuadLasso:
            p.lambda = std::pow(10.0, rng.uniform(-4.0, 2.0));
            break;
        case ModelFamily::Gpr:
            p.theta = std::pow(10.0, rng.uniform(-2.5, -0.5));
            p.noise_var = std::pow(10.0, rng.uniform(-3.0, -0.5));
            break;
        case ModelFamily::Tree:
            p.max_depth = 4 + static_cast<int>(rng.below(9));  // 4..12
            p.min_leaf = std::vector<int>{1, 5, 10}[rng.below(3)];
            break;
        case ModelFamily::Forest:
            p.n_trees = 50 + static_cast<int>(rng.below(251));  // 50..300
            p.feature_frac = rng.uniform(0.3, 1.0);
            p.min_leaf = std::vector<int>{1, 5}[rng.below(2)];
            p.max_depth = 12;
            p.bootstrap = true;
            break;
        case ModelFamily::Gbt:
            p.n_stages = 50 + static_cast<int>(rng.below(451));  // 50..500
            p.learning_rate = rng.uniform(0.01, 0.3);
            p.max_depth = 3;
            p.min_leaf = 5;
            break;
    }
    return p;
}

num::Matrix take_rows(const num::Matrix& x, std::span<const int> rows) {
    num::Matrix out(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            out(i, j) = x(static_cast<std::size_t>(rows[i]), j);
        }
    }
    return out;
}

std::vector<double> take_values(std::span<const double> y, std::span<const int> rows) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[static_cast<std::size_t>(rows[i])];
    return out;
}

double mse_of(const AnyModel& model, const num::Matrix& x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double e = model.predict(x.row(i)) - y[i];
        s += e * e;
    }
    return s / static_cast<double>(x.rows());
}

}  // namespace

SplitMetrics score_predictions(std::span<const double> predictions,
                               std::span<const double> actuals) {
    if (predictions.size() != actuals.size() || predictions.empty()) {
        throw DimensionMismatch("score_predictions needs aligned non-empty inputs");
    }
    const std::size_t n = predictions.size();
    SplitMetrics out;
    std::vector<double> sq(n);
    double total = 0.0;
    double high_total = 0.0;
    std::size_t high_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = predictions[i] - actuals[i];
        sq[i] = e * e;
        total += sq[i];
        if (actuals[i] > -6.0) {
            high_total += sq[i];
            ++high_count;
        }
    }
    out.mse = total / static_cast<double>(n);
    if (high_count > 0) out.hmse = high_total / static_cast<double>(high_count);

    const std::size_t worst =
        static_cast<std::size_t>(std::ceil(0.10 * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sq[a] != sq[b]) return sq[a] > sq[b];
        return a < b;
    });
    double worst_total = 0.0;
    for (std::size_t i = 0; i < worst; ++i) worst_total += sq[order[i]];
    out.wmse = worst_total / static_cast<double>(worst);
    return out;
}

EvalReport evaluate_models(const QotDataset& dataset, const std::vector<ModelSpec>& specs,
                           const EvalOptions& options, std::uint64_t seed) {
    const std::size_t n_all = dataset.x.rows();
    if (n_all < 30) throw InsufficientData("evaluation needs at least 30 samples");
    if (dataset.y.size() != n_all) throw DimensionMismatch("dataset labels misaligned");

    // Restrict to the requested feature subset once, up front.
    num::Matrix x;
    std::vector<int> subset = options.feature_subset;
    if (subset.empty()) {
        x = dataset.x;
    } else {
        x = num::Matrix(n_all, subset.size());
        for (std::size_t i = 0; i < n_all; ++i) {
            for (std::size_t j = 0; j < subset.size(); ++j) {
                x(i, j) = dataset.x(i, static_cast<std::size_t>(subset[j]));
            }
        }
    }

    EvalReport report;
    report.n_splits = options.n_splits;
    report.train_frac = options.train_frac;
    report.seed = seed;
    report.feature_subset = subset;
    for (const auto& spec : specs) {
        ModelEval me;
        me.name = family_name(spec.family);
        me.per_split.resize(static_cast<std::size_t>(options.n_splits));
        report.models.push_back(std::move(me));
    }

    const std::size_t d_used = x.cols();
    std::vector<double> importance_raw(d_used, 0.0);
    std::size_t importance_rounds = 0;

    for (int split = 0; split < options.n_splits; ++split) {
        num::SeededRng split_rng(num::derive_seed(seed, static_cast<std::uint64_t>(split)));

        std::vector<int> perm(n_all);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = 0; i + 1 < n_all; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(split_rng.below(n_all - i));
            std::swap(perm[i], perm[j]);
        }
        const std::size_t n_train =
            static_cast<std::size_t>(std::llround(options.train_frac * static_cast<double>(n_all)));
        std::span<const int> train_rows(perm.data(), n_train);
        std::span<const int> test_rows(perm.data() + n_train, n_all - n_train);

        const num::Matrix x_train = take_rows(x, train_rows);
        const std::vector<double> y_train = take_values(dataset.y, train_rows);
        const num::Matrix x_test = take_rows(x, test_rows);
        const std::vector<double> y_test = take_values(dataset.y, test_rows);

        // Inner 80/20 validation split of the training portion for the
        // random hyperparameter search.
        const std::size_t n_fit = n_train - n_train / 5;
        std::span<const int> fit_rows(perm.data(), n_fit);
        std::span<const int> val_rows(perm.data() + n_fit, n_train - n_fit);
        const num::Matrix x_fit = take_rows(x, fit_rows);
        const std::vector<double> y_fit = take_values(dataset.y, fit_rows);
        const num::Matrix x_val = take_rows(x, val_rows);
        const std::vector<double> y_val = take_values(dataset.y, val_rows);

        if (options.keep_split_details && split == 0) report.split0_actuals = y_test;

        for (std::size_t s = 0; s < specs.size(); ++s) {
            const ModelSpec& spec = specs[s];
            num::SeededRng family_rng = split_rng.derive(100 + s);

            Hyperparams best_params;
            if (spec.fixed) {
                best_params = *spec.fixed;
            } else {
                double best_val = std::numeric_limits<double>::infinity();
                for (int c = 0; c < spec.n_candidates; ++c) {
                    const Hyperparams candidate = sample_hyperparams(spec.family, family_rng);
                    num::SeededRng fit_rng = family_rng.derive(1000 + static_cast<std::uint64_t>(c));
                    try {
                        const AnyModel m = fit_any(spec.family, x_fit, y_fit, candidate, fit_rng,
                                                   options.gpr_train_cap);
                        const double val_mse = mse_of(m, x_val, y_val);
                        if (val_mse < best_val) {
                            best_val = val_mse;
                            best_params = candidate;
                        }
                    } catch (const Error&) {
                        // a degenerate candidate (e.g. unlucky penalty) is skipped
                    }
                }
            }

            num::SeededRng refit_rng = family_rng.derive(2000);
            const AnyModel model =
                fit_any(spec.family, x_train, y_train, best_params, refit_rng,
                        options.gpr_train_cap);

            std::vector<double> preds(x_test.rows());
            for (std::size_t i = 0; i < x_test.rows(); ++i) preds[i] = model.predict(x_test.row(i));
            report.models[s].per_split[static_cast<std::size_t>(split)] =
                score_predictions(preds, y_test);
            if (options.keep_split_details && split == 0) {
                report.split0_predictions.push_back(preds);
            }

            if (options.with_importance && spec.family == ModelFamily::Forest) {
                QotDataset test_ds;
                test_ds.x = x_test;
                test_ds.y = y_test;
                num::SeededRng imp_rng = split_rng.derive(999);
                // accumulate raw (un-normalized) deltas across splits
                const double base_mse = score_predictions(preds, y_test).mse;
                for (std::size_t f = 0; f < d_used; ++f) {
                    double delta_sum = 0.0;
                    for (int p = 0; p < 5; ++p) {
                        std::vector<int> shuffle(static_cast<int>(x_test.rows()));
                        std::iota(shuffle.begin(), shuffle.end(), 0);
                        for (std::size_t i = 0; i + 1 < shuffle.size(); ++i) {
                            const std::size_t j =
                                i + static_cast<std::size_t>(imp_rng.below(shuffle.size() - i));
                            std::swap(shuffle[i], shuffle[j]);
                        }
                        double s_err = 0.0;
                        std::vector<double> row_buf(d_used);
                        for (std::size_t i = 0; i < x_test.rows(); ++i) {
                            const auto row = x_test.row(i);
                            std::copy(row.begin(), row.end(), row_buf.begin());
                            row_buf[f] =
                                x_test(static_cast<std::size_t>(shuffle[i]), f);
                            const double e = model.forest.predict(row_buf) - y_test[i];
                            s_err += e * e;
                        }
                        delta_sum += s_err / static_cast<double>(x_test.rows()) - base_mse;
                    }
                    importance_raw[f] += delta_sum / 5.0;
                }
                ++importance_rounds;
            }
        }
    }

    // Averages over splits; HMSE only over splits where it exists.
    for (auto& me : report.models) {
        double mse_sum = 0.0, wmse_sum = 0.0, hmse_sum = 0.0;
        std::size_t hmse_count = 0;
        for (const auto& sm : me.per_split) {
            mse_sum += sm.mse;
            wmse_sum += sm.wmse;
            if (sm.hmse) {
                hmse_sum += *sm.hmse;
                ++hmse_count;
            }
        }
        const double n_splits = static_cast<double>(me.per_split.size());
        me.mse = mse_sum / n_splits;
        me.wmse = wmse_sum / n_splits;
        if (hmse_count > 0) me.hmse = hmse_sum / static_cast<double>(hmse_count);
    }

    if (options.with_importance && importance_rounds > 0) {
        std::vector<double> raw(d_used, 0.0);
        for (std::size_t f = 0; f < d_used; ++f) {
            raw[f] = std::max(0.0, importance_raw[f] / static_cast<double>(importance_rounds));
        }
        const double max_raw = *std::max_element(raw.begin(), raw.end());
        report.importance.assign(d_used, 0.0);
        if (max_raw > 0.0) {
            for (std::size_t f = 0; f < d_used; ++f) {
                report.importance[f] = 100.0 * raw[f] / max_raw;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// importance and retraining

ImportanceReport feature_importance(const ForestModel& forest, const QotDataset& dataset,
                                    num::SeededRng& rng) {
    const std::size_t n = dataset.x.rows();
    const std::size_t d = dataset.x.cols();
    if (n == 0 || dataset.y.size() != n) throw DimensionMismatch("importance dataset misaligned");

    std::vector<double> base_preds(n);
    for (std::size_t i = 0; i < n; ++i) base_preds[i] = forest.predict(dataset.x.row(i));
    double base_mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = base_preds[i] - dataset.y[i];
        base_mse += e * e;
    }
    base_mse /= static_cast<double>(n);

    std::vector<double> raw(d, 0.0);
    std::vector<double> row_buf(d);
    std::vector<std::size_t> shuffle(n);
    for (std::size_t f = 0; f < d; ++f) {
        double delta_sum = 0.0;
        for (int p = 0; p < 5; ++p) {
            std::iota(shuffle.begin(), shuffle.end(), std::size_t{0});
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
                std::swap(shuffle[i], shuffle[j]);
            }
            double mse = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto row = dataset.x.row(i);
                std::copy(row.begin(), row.end(), row_buf.begin());
                row_buf[f] = dataset.x(shuffle[i], f);
                const double e = forest.predict(row_buf) - dataset.y[i];
                mse += e * e;
            }
            mse /= static_cast<double>(n);
            delta_sum += mse - base_mse;
        }
        raw[f] = std::max(0.0, delta_sum / 5.0);
    }

    ImportanceReport report;
    report.scores.assign(d, 0.0);
    const double max_raw = *std::max_element(raw.begin(), raw.end());
    if (max_raw > 0.0) {
        for (std::size_t f = 0; f < d; ++f) report.scores[f] = 100.0 * raw[f] / max_raw;
    }
    return report;
}

std::vector<int> select_top_features(const std::vector<double>& scores, std::optional<int> k,
                                     std::optional<double> threshold) {
    std::vector<int> selected;
    if (k) {
        if (*k <= 0) throw EmptySelection("top-k selection needs k >= 1");
        std::vector<int> order(scores.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)]) {
                return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
            }
            return a < b;
        });
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(*k), order.size());
        selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    } else if (threshold) {
        for (std::size_t f = 0; f < scores.size(); ++f) {
            if (scores[f] > *threshold) selected.push_back(static_cast<int>(f));
        }
        if (selected.empty()) {
            throw EmptySelection("importance threshold excludes every feature");
        }
    } else {
        throw Error("either k or threshold must be given");
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

EvalReport retrain_top_k(const QotDataset& dataset, const std::vector<double>& scores,
                         std::optional<int> k, std::optional<double> threshold,
                         const std::vector<ModelSpec>& specs, const EvalOptions& options,
                         std::uint64_t seed) {
    EvalOptions reduced = options;
    reduced.feature_subset = select_top_features(scores, k, threshold);
    return evaluate_models(dataset, specs, reduced, seed);
}

// ---------------------------------------------------------------------------
// application

WavelengthVerdict predict_wavelength(const AnyModel& model, std::span<const double> record,
                                     double ber_threshold_log10) {
    WavelengthVerdict verdict;
    verdict.log10_ber = model.predict(record);
    verdict.pass = verdict.log10_ber <= ber_threshold_log10;
    return verdict;
}

std::size_t choose_best_alternate(const AnyModel& model, const num::Matrix& records) {
    if (records.rows() == 0) throw Error("no alternate records given");
    std::size_t best = 0;
    double best_pred = model.predict(records.row(0));
    for (std::size_t i = 1; i < records.rows(); ++i) {
        const double p = model.predict(records.row(i));
        if (p < best_pred) {
            best_pred = p;
            best = i;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// file formats

std::string dataset_to_csv(const QotDataset& dataset) {
    std::ostringstream out;
    const auto& names = feature_names();
    for (const auto& n : names) out << n << ',';
    out << "log10_ber\n";
    char buf[40];
    for (std::size_t i = 0; i < dataset.x.rows(); ++i) {
        for (std::size_t j = 0; j < dataset.x.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", dataset.x(i, j));
            out << buf << ',';
        }
        std::snprintf(buf, sizeof(buf), "%.17g", dataset.y[i]);
        out << buf << '\n';
    }
    return out.str();
}

QotDataset dataset_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty dataset CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        std::ostringstream expect;
        for (const auto& n : feature_names()) expect << n << ',';
        expect << "log10_ber";
        if (line != expect.str()) {
            throw SchemaMismatch("dataset CSV header does not match the 26-feature schema");
        }
    }
    std::vector<double> values;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(row, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("bad numeric cell '" + cell + "' in dataset CSV");
            }
            ++count;
        }
        if (count != static_cast<std::size_t>(kNumFeatures) + 1) {
            throw SchemaMismatch("dataset CSV row has " + std::to_string(count) +
                                 " columns, expected 27");
        }
        ++n_rows;
    }
    QotDataset ds;
    ds.provenance = "imported";
    ds.x = num::Matrix(n_rows, kNumFeatures);
    ds.y.resize(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumFeatures); ++j) {
            ds.x(i, j) = values[i * (kNumFeatures + 1) + j];
        }
        ds.y[i] = values[i * (kNumFeatures + 1) + kNumFeatures];
    }
    return ds;
}

void save_dataset_csv(const QotDataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write dataset CSV '" + path + "'");
    out << dataset_to_csv(dataset);
}

QotDataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset CSV '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return dataset_from_csv(buf.str());
}

namespace {

json tree_to_json(const TreeModel& tree) {
    json j;
    auto& feature = j["feature"] = json::array();
    auto& threshold = j["threshold"] = json::array();
    auto& left = j["left"] = json::array();
    auto& right = j["right"] = json::array();
    auto& value = j["value"] = json::array();
    for (const auto& n : tree.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
    }
    return j;
}

TreeModel tree_from_json(const json& j) {
    TreeModel tree;
    const auto& feature = j.at("feature");
    const auto& threshold = j.at("threshold");
    const auto& left = j.at("left");
    const auto& right = j.at("right");
    const auto& value = j.at("value");
    tree.nodes.resize(feature.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        tree.nodes[i] = {feature[i].get<int>(), threshold[i].get<double>(), left[i].get<int>(),
                         right[i].get<int>(), value[i].get<double>()};
    }
    return tree;
}

}  // namespace

std::string model_to_json(const AnyModel& model) {
    json doc;
    doc["schema"] = "optiplan-model-1";
    doc["family"] = family_name(model.family);
    doc["n_features_in"] = model.n_features_in;
    doc["feature_indices"] = model.feature_indices;
    switch (model.family) {
        case ModelFamily::Ridge:
        case ModelFamily::Lasso:
        case ModelFamily::QuadLasso:
            doc["linear"] = {{"beta", model.linear.beta},
                             {"intercept", model.linear.intercept},
                             {"quadratic", model.linear.quadratic}};
            break;
        case ModelFamily::Tree:
            doc["tree"] = tree_to_json(model.tree);
            break;
        case ModelFamily::Forest: {
            json trees = json::array();
            for (const auto& t : model.forest.trees) trees.push_back(tree_to_json(t));
            doc["forest"] = {{"trees", std::move(trees)}};
            break;
        }
        case ModelFamily::Gbt: {
            json trees = json::array();
            for (const auto& t : model.gbt.trees) trees.push_back(tree_to_json(t));
            doc["gbt"] = {{"base", model.gbt.base},
                          {"learning_rate", model.gbt.learning_rate},
                          {"trees", std::move(trees)}};
            break;
        }
        case ModelFamily::Gpr: {
            doc["gpr"] = {{"theta", model.gpr.theta},
                          {"noise_var", model.gpr.noise_var},
                          {"rows", model.gpr.train_x.rows()},
                          {"cols", model.gpr.train_x.cols()},
                          {"train_x", model.gpr.train_x.data()},
                          {"feat_mean", model.gpr.feat_mean},
                          {"feat_sd", model.gpr.feat_sd},
                          {"alpha", model.gpr.alpha},
                          {"y_mean", model.gpr_y_mean}};
            break;
        }
    }
    return doc.dump() + "\n";
}

AnyModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
    try {
        if (doc.value("schema", "") != "optiplan-model-1") {
            throw SchemaMismatch("expected schema 'optiplan-model-1'");
        }
        AnyModel model;
        model.family = family_from_name(doc.at("family").get<std::string>());
        model.n_features_in = doc.at("n_features_in").get<int>();
        model.feature_indices = doc.value("feature_indices", std::vector<int>{});
        switch (model.family) {
            case ModelFamily::Ridge:
            case ModelFamily::Lasso:
            case ModelFamily::QuadLasso: {
                const auto& j = doc.at("linear");
                model.linear.beta = j.at("beta").get<std::vector<double>>();
                model.linear.intercept = j.at("intercept").get<double>();
                model.linear.quadratic = j.value("quadratic", false);
                break;
            }
            case ModelFamily::Tree:
                model.tree = tree_from_json(doc.at("tree"));
                break;
            case ModelFamily::Forest:
                for (const auto& jt : doc.at("forest").at("trees")) {
                    model.forest.trees.push_back(tree_from_json(jt));
                }
                break;
            case ModelFamily::Gbt: {
                const auto& j = doc.at("gbt");
                model.gbt.base = j.at("base").get<double>();
                model.gbt.learning_rate = j.at("learning_rate").get<double>();
                for (const auto& jt : j.at("trees")) {
                    model.gbt.trees.push_back(tree_from_json(jt));
                }
                break;
            }
            case ModelFamily::Gpr: {
                const auto& j = doc.at("gpr");
                const std::size_t rows = j.at("rows").get<std::size_t>();
                const std::size_t cols = j.at("cols").get<std::size_t>();
                // Rebuild the kernel factor from the stored training inputs;
                // identical input bits reproduce the factorization bitwise.
                forecast::GprModel raw;
                raw.theta = j.at("theta").get<double>();
                raw.noise_var = j.at("noise_var").get<double>();
                raw.train_x = num::Matrix(rows, cols, j.at("train_x").get<std::vector<double>>());
                raw.feat_mean = j.at("feat_mean").get<std::vector<double>>();
                raw.feat_sd = j.at("feat_sd").get<std::vector<double>>();
                raw.alpha = j.at("alpha").get<std::vector<double>>();
                num::Matrix k(rows, rows);
                for (std::size_t a = 0; a < rows; ++a) {
                    k(a, a) = 1.0 + raw.noise_var;
                    for (std::size_t b = 0; b < a; ++b) {
                        double s = 0.0;
                        for (std::size_t c = 0; c < cols; ++c) {
                            const double dd = raw.train_x(a, c) - raw.train_x(b, c);
                            s += dd * dd;
                        }
                        const double v = std::exp(-raw.theta * s);
                        k(a, b) = v;
                        k(b, a) = v;
                    }
                }
                raw.chol = num::cholesky(k);
                model.gpr = std::move(raw);
                model.gpr_y_mean = j.at("y_mean").get<double>();
                break;
            }
        }
        return model;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
}

}  // namespace optiplan::qot
