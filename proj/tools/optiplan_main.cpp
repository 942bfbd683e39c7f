#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "optiplan/errors.hpp"
#include "optiplan/forecast.hpp"
#include "optiplan/mlopt.hpp"
#include "optiplan/netmodel.hpp"
#include "optiplan/qot.hpp"
#include "optiplan/timeutil.hpp"
#include "optiplan/traffgen.hpp"

using nlohmann::json;
using namespace optiplan;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
}

/// Every run records its resolved configuration and seed next to (or inside)
/// its output so reruns are reproducible.
void write_run_sidecar(const std::string& out_path, const json& run) {
    json doc;
    doc["schema"] = "optiplan-run-1";
    doc["run"] = run;
    spit(out_path + ".run.json", doc.dump(2) + "\n");
}

/// "1,2,5" / "1..96" / mixes of both.
std::vector<int> parse_horizons(const std::string& text) {
    std::vector<int> out;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        const auto dots = part.find("..");
        if (dots != std::string::npos) {
            const int lo = std::stoi(part.substr(0, dots));
            const int hi = std::stoi(part.substr(dots + 2));
            for (int h = lo; h <= hi; ++h) out.push_back(h);
        } else if (!part.empty()) {
            out.push_back(std::stoi(part));
        }
    }
    return out;
}

int cmd_gen_traffic(const std::string& config_path, const std::string& out_path,
                    std::uint64_t seed) {
    const traffic::GeneratorConfig config =
        traffic::generator_config_from_json(slurp(config_path));
    const num::SeededRng rng(seed);
    const auto series =
        traffic::generate_matrix_series(config.endpoints, config.n_classes,
                                        traffic::sampler_from_config(config), config.rho_shared,
                                        config.n_hours, rng, config.start_hour);
    save_series_csv(series, out_path);
    json run{{"command", "gen-traffic"},
             {"seed", seed},
             {"config", json::parse(slurp(config_path))},
             {"out", out_path}};
    write_run_sidecar(out_path, run);
    return 0;
}

int cmd_forecast(const std::string& series_path, const std::string& horizons_text,
                 std::size_t train_hours, std::size_t test_hours, int max_lag,
                 const std::string& out_path, const std::string& pairs_out,
                 std::uint64_t seed) {
    const std::vector<int> horizons = parse_horizons(horizons_text);
    if (horizons.empty()) throw Error("no horizons given");
    for (int h : horizons) {
        if (h < 1) {
            std::cerr << "error: forecast horizon must be >= 1\n";
            return 2;
        }
    }
    const auto series = load_series_csv(series_path);

    json tunnels_json = json::object();
    std::ostringstream pairs;
    pairs << "timestamp,tunnel_id,horizon,actual,forecast\n";
    char buf[64];

    for (const auto& [id, ts] : series) {
        json per_tunnel;
        json per_horizon = json::object();
        for (int h : horizons) {
            json jh;
            if (test_hours > 0) {
                const std::size_t train_len =
                    train_hours > 0
                        ? train_hours
                        : ts.values.size() - test_hours - static_cast<std::size_t>(h) + 1;
                const auto r = forecast::evaluate_horizon(ts, h, train_len, test_hours,
                                                          forecast::ForecasterKind::Gpr, max_lag);
                TimeSeries train;
                train.start_hour = ts.start_hour;
                train.values.assign(ts.values.begin(),
                                    ts.values.begin() + static_cast<std::ptrdiff_t>(train_len));
                const forecast::Forecast point = forecast::forecast(train, h, max_lag);
                jh["mean"] = point.mean;
                jh["ci_half_width"] = point.ci_half_width;
                jh["lags"] = r.lags;
                jh["mae_overall"] = r.eval.mae_overall;
                jh["mae_peak"] = r.eval.mae_peak;
                for (std::size_t i = 0; i < r.predictions.size(); ++i) {
                    pairs << iso_from_epoch_hours(r.timestamps[i]) << ',' << id << ',' << h << ',';
                    std::snprintf(buf, sizeof(buf), "%.10g", r.actuals[i]);
                    pairs << buf << ',';
                    std::snprintf(buf, sizeof(buf), "%.10g", r.predictions[i]);
                    pairs << buf << '\n';
                }
            } else {
                const forecast::Forecast point = forecast::forecast(ts, h, max_lag);
                jh["mean"] = point.mean;
                jh["ci_half_width"] = point.ci_half_width;
                jh["lags"] = point.lags;
            }
            per_horizon[std::to_string(h)] = std::move(jh);
        }
        per_tunnel["horizons"] = std::move(per_horizon);
        tunnels_json[id] = std::move(per_tunnel);
    }

    json doc;
    doc["schema"] = "optiplan-forecast-1";
    doc["run"] = {{"command", "forecast"}, {"seed", seed},       {"series", series_path},
                  {"horizons", horizons},  {"train_hours", train_hours},
                  {"test_hours", test_hours}, {"max_lag", max_lag}};
    doc["tunnels"] = std::move(tunnels_json);
    spit(out_path, doc.dump(2) + "\n");
    if (!pairs_out.empty()) spit(pairs_out, pairs.str());
    return 0;
}

int cmd_plan(const std::string& network_path, const std::string& scenarios_path,
             const std::string& modes_text, int orderings, const std::string& out_path,
             const std::string& json_out, std::uint64_t seed) {
    const std::vector<int> modes = parse_horizons(modes_text);
    for (int m : modes) {
        if (m < 1 || m > 4) {
            std::cerr << "error: planning mode must be in 1..4\n";
            return 2;
        }
    }
    const net::MultiLayerNetwork network = net::load_network(network_path);
    const auto violations = net::validate(network);
    for (const auto& v : violations) {
        if (v.severity == net::Violation::Severity::Error) {
            std::cerr << "error: invalid network: " << v.message << "\n";
            return 1;
        }
    }
    const plan::ScenarioSet scenarios = plan::load_scenarios(scenarios_path);

    plan::PlanConfig config;
    config.uncertainty_factor = scenarios.uncertainty_factor;
    config.n_orderings = orderings;

    std::vector<plan::PlanResult> results;
    for (int mode : modes) {
        num::SeededRng rng(num::derive_seed(seed, static_cast<std::uint64_t>(mode)));
        results.push_back(plan::plan_capacity(network, scenarios.base_traffic, scenarios.classes,
                                              scenarios.failures, scenarios.surges, mode, config,
                                              rng));
    }
    spit(out_path, plan::plan_results_to_csv(results));
    if (!json_out.empty()) spit(json_out, plan::plan_results_to_json(results));
    json run{{"command", "plan"},     {"seed", seed},
             {"network", network_path}, {"scenarios", scenarios_path},
             {"modes", modes},        {"orderings", orderings}};
    write_run_sidecar(out_path, run);
    return 0;
}

int cmd_qot_gen(std::size_t n, double noise, const std::string& out_path, std::uint64_t seed) {
    num::SeededRng rng(seed);
    const qot::QotDataset ds = qot::synth_qot_dataset(n, rng, noise);
    qot::save_dataset_csv(ds, out_path);
    json run{{"command", "qot gen"}, {"seed", seed}, {"n", n}, {"label_noise_sd", noise}};
    write_run_sidecar(out_path, run);
    return 0;
}

int cmd_qot_train(const std::string& data_path, const std::string& family_name,
                  const std::string& importance_path, int top_k, const std::string& out_path,
                  std::uint64_t seed) {
    const qot::QotDataset ds = qot::load_dataset_csv(data_path);
    const qot::ModelFamily family = qot::family_from_name(family_name);

    std::vector<int> subset;
    if (!importance_path.empty()) {
        const json imp = json::parse(slurp(importance_path));
        std::vector<double> scores(qot::kNumFeatures, 0.0);
        for (const auto& item : imp.at("scores")) {
            scores[static_cast<std::size_t>(
                qot::feature_index(item.at("feature").get<std::string>()))] =
                item.at("score").get<double>();
        }
        subset = qot::select_top_features(scores, top_k, std::nullopt);
    }

    num::Matrix x = ds.x;
    if (!subset.empty()) {
        x = num::Matrix(ds.x.rows(), subset.size());
        for (std::size_t i = 0; i < ds.x.rows(); ++i) {
            for (std::size_t j = 0; j < subset.size(); ++j) {
                x(i, j) = ds.x(i, static_cast<std::size_t>(subset[j]));
            }
        }
    }
    qot::Hyperparams params;
    params.n_trees = 200;
    params.feature_frac = 0.8;
    params.max_depth = 12;
    params.min_leaf = 1;
    num::SeededRng rng(seed);
    qot::AnyModel model = qot::fit_any(family, x, ds.y, params, rng);
    model.n_features_in = qot::kNumFeatures;
    model.feature_indices = subset;
    spit(out_path, qot::model_to_json(model));
    json run{{"command", "qot train"}, {"seed", seed},   {"data", data_path},
             {"model", family_name},    {"top_k", top_k}, {"importance", importance_path}};
    write_run_sidecar(out_path, run);
    return 0;
}

json eval_report_to_json(const qot::EvalReport& report) {
    json doc;
    doc["schema"] = "optiplan-qot-eval-1";
    doc["n_splits"] = report.n_splits;
    doc["train_frac"] = report.train_frac;
    doc["seed"] = report.seed;
    doc["models"] = json::array();
    for (const auto& m : report.models) {
        json jm{{"model", m.name}, {"mse", m.mse}, {"wmse", m.wmse}};
        if (m.hmse) {
            jm["hmse"] = *m.hmse;
        } else {
            jm["hmse"] = nullptr;
        }
        doc["models"].push_back(std::move(jm));
    }
    if (!report.importance.empty()) {
        json imp = json::array();
        for (std::size_t f = 0; f < report.importance.size(); ++f) {
            const int col = report.feature_subset.empty() ? static_cast<int>(f)
                                                          : report.feature_subset[f];
            imp.push_back({{"feature", qot::feature_names()[static_cast<std::size_t>(col)]},
                           {"score", report.importance[f]}});
        }
        doc["importance"] = std::move(imp);
    }
    return doc;
}

std::vector<qot::ModelSpec> specs_from_names(const std::string& names) {
    if (names.empty()) return qot::default_model_specs();
    std::vector<qot::ModelSpec> specs;
    std::istringstream in(names);
    std::string part;
    while (std::getline(in, part, ',')) {
        for (const auto& spec : qot::default_model_specs()) {
            if (qot::family_name(spec.family) == part) specs.push_back(spec);
        }
    }
    if (specs.empty()) throw Error("no known model families in '" + names + "'");
    return specs;
}

int cmd_qot_eval(const std::string& data_path, int splits, const std::string& models,
                 bool with_importance, const std::string& out_path, const std::string& pairs_out,
                 std::uint64_t seed) {
    const qot::QotDataset ds = qot::load_dataset_csv(data_path);
    qot::EvalOptions options;
    options.n_splits = splits;
    options.with_importance = with_importance;
    options.keep_split_details = !pairs_out.empty();
    const qot::EvalReport report =
        qot::evaluate_models(ds, specs_from_names(models), options, seed);
    json doc = eval_report_to_json(report);
    doc["run"] = {{"command", "qot eval"}, {"seed", seed},     {"data", data_path},
                  {"splits", splits},       {"models", models}, {"importance", with_importance}};
    spit(out_path, doc.dump(2) + "\n");
    if (!pairs_out.empty()) {
        std::ostringstream pairs;
        pairs << "model,actual,predicted\n";
        char buf[64];
        for (std::size_t m = 0; m < report.split0_predictions.size(); ++m) {
            for (std::size_t i = 0; i < report.split0_actuals.size(); ++i) {
                pairs << report.models[m].name << ',';
                std::snprintf(buf, sizeof(buf), "%.10g", report.split0_actuals[i]);
                pairs << buf << ',';
                std::snprintf(buf, sizeof(buf), "%.10g", report.split0_predictions[m][i]);
                pairs << buf << '\n';
            }
        }
        spit(pairs_out, pairs.str());
    }
    return 0;
}

int cmd_qot_importance(const std::string& data_path, const std::string& out_path,
                       std::uint64_t seed) {
    const qot::QotDataset ds = qot::load_dataset_csv(data_path);
    qot::Hyperparams params;
    params.n_trees = 200;
    params.feature_frac = 0.8;
    params.max_depth = 12;
    params.min_leaf = 1;
    num::SeededRng rng(seed);
    const qot::ForestModel forest = qot::fit_random_forest(
        ds.x, ds.y, params.n_trees, params.feature_frac, params.bootstrap, rng, params.max_depth,
        params.min_leaf);
    num::SeededRng imp_rng = rng.derive(1);
    const qot::ImportanceReport report = qot::feature_importance(forest, ds, imp_rng);

    std::vector<std::size_t> order(report.scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (report.scores[a] != report.scores[b]) return report.scores[a] > report.scores[b];
        return a < b;
    });
    json doc;
    doc["schema"] = "optiplan-importance-1";
    doc["run"] = {{"command", "qot importance"}, {"seed", seed}, {"data", data_path}};
    doc["scores"] = json::array();
    for (std::size_t f : order) {
        doc["scores"].push_back(
            {{"feature", qot::feature_names()[f]}, {"score", report.scores[f]}});
    }
    spit(out_path, doc.dump(2) + "\n");
    return 0;
}

int cmd_qot_predict(const std::string& model_path, const std::string& records_path,
                    double threshold, const std::string& out_path, std::uint64_t seed) {
    const qot::AnyModel model = qot::model_from_json(slurp(model_path));
    const qot::QotDataset records = qot::load_dataset_csv(records_path);

    std::ostringstream out;
    out << "index,predicted_log10_ber,verdict\n";
    char buf[64];
    for (std::size_t i = 0; i < records.x.rows(); ++i) {
        const auto verdict = qot::predict_wavelength(model, records.x.row(i), threshold);
        std::snprintf(buf, sizeof(buf), "%.10g", verdict.log10_ber);
        out << i << ',' << buf << ',' << (verdict.pass ? "pass" : "fail") << '\n';
    }
    spit(out_path, out.str());
    json run{{"command", "qot predict"},
             {"seed", seed},
             {"model", model_path},
             {"records", records_path},
             {"threshold", threshold}};
    write_run_sidecar(out_path, run);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optiplan: traffic forecasting, multi-layer capacity planning and "
                 "wavelength QoT prediction on synthetic IP/optical networks"};
    app.require_subcommand(1);
    std::uint64_t seed = 12345;
    app.add_option("--seed", seed, "master seed; all randomness derives from it");

    // gen-traffic
    auto* gen = app.add_subcommand("gen-traffic", "generate synthetic TE-tunnel series (CSV)");
    std::string gen_config, gen_out;
    gen->add_option("--config", gen_config, "generator profile JSON")->required();
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // forecast
    auto* fc = app.add_subcommand("forecast", "per-tunnel GPR forecasts (JSON report)");
    std::string fc_series, fc_out, fc_horizons = "24", fc_pairs;
    std::size_t fc_train = 0, fc_test = 0;
    int fc_max_lag = 168;
    fc->add_option("--series", fc_series, "input series CSV")->required();
    fc->add_option("--out", fc_out, "output JSON path")->required();
    fc->add_option("--horizons", fc_horizons, "horizons, e.g. '24' or '1..96'");
    fc->add_option("--train-hours", fc_train, "training prefix length (0: derive)");
    fc->add_option("--test-hours", fc_test, "evaluation window length (0: none)");
    fc->add_option("--max-lag", fc_max_lag, "PACF lag ceiling");
    fc->add_option("--pairs-out", fc_pairs, "actual-vs-forecast pairs CSV");

    // plan
    auto* pl = app.add_subcommand("plan", "scenario-based capacity planning (CSV)");
    std::string pl_net, pl_scen, pl_out, pl_json, pl_modes = "1,2,3,4";
    int pl_orderings = 10;
    pl->add_option("--network", pl_net, "network JSON")->required();
    pl->add_option("--scenarios", pl_scen, "scenario JSON")->required();
    pl->add_option("--out", pl_out, "output CSV path")->required();
    pl->add_option("--json", pl_json, "optional detailed JSON output");
    pl->add_option("--modes", pl_modes, "planning modes, e.g. '1,2,3,4'");
    pl->add_option("--orderings", pl_orderings, "scenario orderings to try");

    // qot
    auto* qt = app.add_subcommand("qot", "wavelength QoT workflows");
    qt->require_subcommand(1);

    auto* qgen = qt->add_subcommand("gen", "generate a synthetic QoT dataset (CSV)");
    std::size_t qgen_n = 2700;
    double qgen_noise = 0.7;
    std::string qgen_out;
    qgen->add_option("--n", qgen_n, "sample count");
    qgen->add_option("--noise", qgen_noise, "label noise standard deviation");
    qgen->add_option("--out", qgen_out, "output CSV path")->required();

    auto* qtrain = qt->add_subcommand("train", "train one model on a dataset");
    std::string qtrain_data, qtrain_model = "random_forest", qtrain_out, qtrain_imp;
    int qtrain_topk = 0;
    qtrain->add_option("--data", qtrain_data, "dataset CSV")->required();
    qtrain->add_option("--model", qtrain_model, "model family name");
    qtrain->add_option("--out", qtrain_out, "model JSON path")->required();
    qtrain->add_option("--importance", qtrain_imp, "importance JSON (enables --top-k)");
    qtrain->add_option("--top-k", qtrain_topk, "train on the top-k features");

    auto* qeval = qt->add_subcommand("eval", "repeated-split evaluation report (JSON)");
    std::string qeval_data, qeval_out, qeval_models, qeval_pairs;
    int qeval_splits = 50;
    bool qeval_importance = false;
    qeval->add_option("--data", qeval_data, "dataset CSV")->required();
    qeval->add_option("--out", qeval_out, "report JSON path")->required();
    qeval->add_option("--splits", qeval_splits, "number of random splits");
    qeval->add_option("--models", qeval_models, "comma-separated family names");
    qeval->add_flag("--importance", qeval_importance, "aggregate forest importance");
    qeval->add_option("--pairs-out", qeval_pairs, "predicted-vs-actual pairs CSV (split 0)");

    auto* qimp = qt->add_subcommand("importance", "forest permutation importance (JSON)");
    std::string qimp_data, qimp_out;
    qimp->add_option("--data", qimp_data, "dataset CSV")->required();
    qimp->add_option("--out", qimp_out, "importance JSON path")->required();

    auto* qpred = qt->add_subcommand("predict", "pass/fail verdicts for records");
    std::string qpred_model, qpred_records, qpred_out;
    double qpred_threshold = -6.0;
    qpred->add_option("--model", qpred_model, "model JSON")->required();
    qpred->add_option("--records", qpred_records, "records CSV (dataset format)")->required();
    qpred->add_option("--threshold", qpred_threshold, "log10 BER pass threshold");
    qpred->add_option("--out", qpred_out, "verdict CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_traffic(gen_config, gen_out, seed);
        if (fc->parsed()) {
            return cmd_forecast(fc_series, fc_horizons, fc_train, fc_test, fc_max_lag, fc_out,
                                fc_pairs, seed);
        }
        if (pl->parsed()) {
            return cmd_plan(pl_net, pl_scen, pl_modes, pl_orderings, pl_out, pl_json, seed);
        }
        if (qt->parsed()) {
            if (qgen->parsed()) return cmd_qot_gen(qgen_n, qgen_noise, qgen_out, seed);
            if (qtrain->parsed()) {
                return cmd_qot_train(qtrain_data, qtrain_model, qtrain_imp, qtrain_topk,
                                     qtrain_out, seed);
            }
            if (qeval->parsed()) {
                return cmd_qot_eval(qeval_data, qeval_splits, qeval_models, qeval_importance,
                                    qeval_out, qeval_pairs, seed);
            }
            if (qimp->parsed()) return cmd_qot_importance(qimp_data, qimp_out, seed);
            if (qpred->parsed()) {
                return cmd_qot_predict(qpred_model, qpred_records, qpred_threshold, qpred_out,
                                       seed);
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
