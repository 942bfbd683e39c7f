#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optiplan/forecast.hpp"  // GprModel
#include "optiplan/matrix.hpp"
#include "optiplan/rng.hpp"

namespace optiplan::qot {

inline constexpr int kNumFeatures = 26;

/// Fixed column order of the wavelength feature vector (and of the dataset
/// CSV): data_rate, fiber_type, frequency_thz, path_length_km, margin_db,
/// fiber_loss_db, measurement_age_days, n_amplifiers, n_passthrough_roadms,
/// orl_db, osnr_db, pmd_ps, aux_1..aux_14.
const std::vector<std::string>& feature_names();
int feature_index(const std::string& name);

struct QotDataset {
    num::Matrix x;          // n rows x 26 features
    std::vector<double> y;  // log10(pre-FEC BER), clamped to [-15, -2]
    std::string provenance = "synthetic";
};

// --- OSNR estimation -------------------------------------------------------

/// Per-span OSNR in dB for a 0.1 nm reference bandwidth:
/// osnr = 58 + launch_power_dbm - span_loss_db - amp_noise_figure_db.
/// The 58 dB constant is -10*log10(h*nu*B_ref) at 193.4 THz, a documented
/// design constant of this tool.
double span_osnr(double launch_power_dbm, double span_loss_db, double amp_noise_figure_db);

/// End-to-end OSNR: noise adds reciprocally in linear units,
/// total = -10*log10(sum_i 10^(-osnr_i/10)).
double combine_path_osnr(std::span<const double> span_osnrs_db);

// --- synthetic dataset ------------------------------------------------------

/// Noise-free planted label g(record): higher (worse) log10 BER for longer
/// paths and lower OSNR, 100G strictly worse than 40G, plus a frequency
/// ripple and weak terms on the remaining features. This closed form is the
/// ground truth the tests recover.
double planted_label(std::span<const double> record);

/// Synthetic wavelength dataset. OSNR is derived from per-section span_osnr
/// values combined along the path, so it correlates with path length; the
/// label is planted_label(record) + N(0, label_noise_sd), clamped to
/// [-15, -2]. aux_14 is a constant slot.
QotDataset synth_qot_dataset(std::size_t n, num::SeededRng& rng, double label_noise_sd = 0.7);

// --- model families ---------------------------------------------------------

enum class ModelFamily { Ridge, Lasso, QuadLasso, Gpr, Tree, Forest, Gbt };
std::string family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);

struct Hyperparams {
    double lambda = 1.0;
    int max_depth = 8;
    int min_leaf = 5;
    int n_trees = 100;
    double feature_frac = 1.0;
    bool bootstrap = true;
    int n_stages = 100;
    double learning_rate = 0.1;
    double theta = 0.02;
    double noise_var = 0.1;
};

struct LinearModel {
    std::vector<double> beta;
    double intercept = 0.0;
    bool quadratic = false;  // apply quad_expand to the input row first
    int n_sweeps = 0;        // lasso coordinate-descent sweeps used
    double predict(std::span<const double> x) const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct TreeModel {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> x) const;
};

struct ForestModel {
    std::vector<TreeModel> trees;
    double predict(std::span<const double> x) const;  // arithmetic mean of trees
};

struct GbtModel {
    double base = 0.0;
    double learning_rate = 0.1;
    std::vector<TreeModel> trees;
    std::vector<double> training_mse;  // training MSE after each stage (stage 0 first)
    double predict(std::span<const double> x) const;
};

/// Ridge objective (1/2n)|y - b - X beta|^2 + (lambda/2)|beta|^2, intercept
/// unpenalized; closed-form solve. On a zero-mean unit-variance orthogonal
/// design this reduces to beta_ols/(1+lambda).
LinearModel fit_ridge(const num::Matrix& x, std::span<const double> y, double lambda);

/// LASSO objective (1/2n)|y - b - X beta|^2 + lambda*|beta|_1 by cyclic
/// coordinate descent on internally standardized features. On a zero-mean
/// unit-variance orthogonal design each coefficient is
/// soft_threshold(beta_ols, lambda).
LinearModel fit_lasso(const num::Matrix& x, std::span<const double> y, double lambda,
                      double tol = 1e-7, int max_sweeps = 10000);

/// All ordered pairwise products: d columns -> d*d columns, column (i,j) at
/// index i*d+j.
num::Matrix quad_expand(const num::Matrix& x);

LinearModel fit_quad_lasso(const num::Matrix& x, std::span<const double> y, double lambda);

/// Greedy binary regression tree minimizing the summed child squared error;
/// splits at midpoints between consecutive distinct feature values; leaves
/// predict the mean target.
TreeModel fit_tree(const num::Matrix& x, std::span<const double> y, int max_depth, int min_leaf);

/// Bootstrap resampling is realized as multinomial sample weights; the
/// feature subset (ceil(feature_frac*d) features) is re-drawn at every split.
ForestModel fit_random_forest(const num::Matrix& x, std::span<const double> y, int n_trees,
                              double feature_frac, bool bootstrap, num::SeededRng& rng,
                              int max_depth = 12, int min_leaf = 1);

GbtModel fit_gbt(const num::Matrix& x, std::span<const double> y, int n_stages,
                 double learning_rate, int max_depth, int min_leaf = 5);

/// Any trained model plus the original-column indices it consumes.
struct AnyModel {
    ModelFamily family = ModelFamily::Forest;
    LinearModel linear;
    TreeModel tree;
    ForestModel forest;
    GbtModel gbt;
    forecast::GprModel gpr;
    double gpr_y_mean = 0.0;
    int n_features_in = kNumFeatures;  // width of raw records fed to predict()
    std::vector<int> feature_indices;  // columns selected out of the raw record
    Hyperparams params;

    double predict(std::span<const double> record) const;
};

AnyModel fit_any(ModelFamily family, const num::Matrix& x, std::span<const double> y,
                 const Hyperparams& params, num::SeededRng& rng, std::size_t gpr_train_cap = 800);

// --- evaluation harness ------------------------------------------------------

struct ModelSpec {
    ModelFamily family = ModelFamily::Forest;
    int n_candidates = 3;               // random hyperparameter draws per split
    std::optional<Hyperparams> fixed;   // bypass the search when set
};

/// The six families of the comparison table, in report order.
std::vector<ModelSpec> default_model_specs();

struct SplitMetrics {
    double mse = 0.0;
    std::optional<double> hmse;  // absent when no test label exceeds -6
    double wmse = 0.0;
};

/// MSE over all points; HMSE over points with log10_ber > -6; WMSE over the
/// ceil(10%) points with the largest squared errors (ties by index).
SplitMetrics score_predictions(std::span<const double> predictions,
                               std::span<const double> actuals);

struct ModelEval {
    std::string name;
    double mse = 0.0;
    double wmse = 0.0;
    std::optional<double> hmse;
    std::vector<SplitMetrics> per_split;
};

struct EvalReport {
    std::vector<ModelEval> models;
    int n_splits = 0;
    double train_frac = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> importance;     // normalized 0..100, when requested
    std::vector<int> feature_subset;    // original columns used (empty = all)
    // split-0 audit trail, kept when EvalOptions::keep_split_details is set
    std::vector<double> split0_actuals;
    std::vector<std::vector<double>> split0_predictions;  // per model
};

struct EvalOptions {
    int n_splits = 50;
    double train_frac = 2.0 / 3.0;
    bool with_importance = false;    // permutation importance of the forest rows
    std::vector<int> feature_subset; // original column indices (empty = all)
    std::size_t gpr_train_cap = 800; // GPR rows are subsampled beyond this
    bool keep_split_details = false;
};

/// Repeated random splits with a fresh hyperparameter search per split
/// (random candidates scored on an inner 80/20 validation split of the
/// training portion). Split i derives its seed from (seed, i), so splits can
/// run in any order with identical results.
EvalReport evaluate_models(const QotDataset& dataset, const std::vector<ModelSpec>& specs,
                           const EvalOptions& options, std::uint64_t seed);

// --- importance and retraining ----------------------------------------------

struct ImportanceReport {
    std::vector<double> scores;  // per feature, normalized so the max is 100
};

/// Permutation importance: average MSE increase over 5 random permutations of
/// each feature column, floored at 0 and normalized to a 0..100 scale.
ImportanceReport feature_importance(const ForestModel& forest, const QotDataset& dataset,
                                    num::SeededRng& rng);

/// Top-k (score descending, ties by index) or score > threshold; returns the
/// selected original column indices in ascending order.
std::vector<int> select_top_features(const std::vector<double>& scores, std::optional<int> k,
                                     std::optional<double> threshold);

EvalReport retrain_top_k(const QotDataset& dataset, const std::vector<double>& scores,
                         std::optional<int> k, std::optional<double> threshold,
                         const std::vector<ModelSpec>& specs, const EvalOptions& options,
                         std::uint64_t seed);

// --- application -------------------------------------------------------------

struct WavelengthVerdict {
    double log10_ber = 0.0;
    bool pass = false;
};

/// Pass iff the predicted log10 BER does not exceed the threshold.
WavelengthVerdict predict_wavelength(const AnyModel& model, std::span<const double> record,
                                     double ber_threshold_log10);

/// Among alternate candidate records, the lowest predicted BER wins.
std::size_t choose_best_alternate(const AnyModel& model, const num::Matrix& records);

// --- file formats -------------------------------------------------------------

std::string dataset_to_csv(const QotDataset& dataset);
QotDataset dataset_from_csv(const std::string& text);
void save_dataset_csv(const QotDataset& dataset, const std::string& path);
QotDataset load_dataset_csv(const std::string& path);

/// Versioned model document, schema "optiplan-model-1"; reloading reproduces
/// predictions bitwise.
std::string model_to_json(const AnyModel& model);
AnyModel model_from_json(const std::string& text);

}  // namespace optiplan::qot
