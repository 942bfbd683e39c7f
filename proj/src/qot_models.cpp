#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "optiplan/errors.hpp"
#include "optiplan/qot.hpp"

namespace optiplan::qot {

// ---------------------------------------------------------------------------
// linear models

double LinearModel::predict(std::span<const double> x) const {
    if (!quadratic) {
        if (x.size() != beta.size()) throw DimensionMismatch("linear model input size mismatch");
        double v = intercept;
        for (std::size_t i = 0; i < x.size(); ++i) v += beta[i] * x[i];
        return v;
    }
    const std::size_t d = x.size();
    if (d * d != beta.size()) throw DimensionMismatch("quadratic model input size mismatch");
    double v = intercept;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) v += beta[i * d + j] * x[i] * x[j];
    }
    return v;
}

LinearModel fit_ridge(const num::Matrix& x, std::span<const double> y, double lambda) {
    if (lambda < 0.0) throw Error("ridge penalty must be non-negative");
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n || n == 0) throw DimensionMismatch("ridge inputs misaligned");

    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    // Sxx = Xc'Xc/n + lambda*I, rhs = Xc'yc/n.
    num::Matrix sxx(d, d);
    std::vector<double> rhs(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double xj = x(i, j) - mean[j];
            rhs[j] += xj * (y[i] - y_mean);
            for (std::size_t k = 0; k <= j; ++k) {
                sxx(j, k) += xj * (x(i, k) - mean[k]);
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k <= j; ++k) {
            const double v = sxx(j, k) / static_cast<double>(n);
            sxx(j, k) = v;
            sxx(k, j) = v;
        }
        sxx(j, j) += lambda;
        rhs[j] /= static_cast<double>(n);
    }

    LinearModel model;
    try {
        model.beta = num::solve_psd(sxx, rhs);
    } catch (const NotPositiveDefinite&) {
        if (lambda == 0.0) {
            throw SingularSystem("rank-deficient design with zero ridge penalty");
        }
        throw;
    }
    model.intercept = y_mean;
    for (std::size_t j = 0; j < d; ++j) model.intercept -= model.beta[j] * mean[j];
    return model;
}

namespace {

inline double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace

LinearModel fit_lasso(const num::Matrix& x, std::span<const double> y, double lambda, double tol,
                      int max_sweeps) {
    if (lambda < 0.0) throw Error("lasso penalty must be non-negative");
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n || n == 0) throw DimensionMismatch("lasso inputs misaligned");

    // Standardize internally; zero-variance columns get coefficient 0.
    std::vector<double> mean(d, 0.0);
    std::vector<double> sd(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    }
    for (auto& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = x(i, j) - mean[j];
            sd[j] += v * v;
        }
    }
    for (auto& s : sd) s = std::sqrt(s / static_cast<double>(n));

    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    // Column-major standardized copy for cache-friendly coordinate sweeps.
    std::vector<double> cols(d * n, 0.0);
    std::vector<bool> active(d, false);
    for (std::size_t j = 0; j < d; ++j) {
        if (sd[j] > 0.0) {
            active[j] = true;
            double* cj = &cols[j * n];
            for (std::size_t i = 0; i < n; ++i) cj[i] = (x(i, j) - mean[j]) / sd[j];
        }
    }

    std::vector<double> beta_std(d, 0.0);
    std::vector<double> residual(y.begin(), y.end());
    for (auto& r : residual) r -= y_mean;

    const double inv_n = 1.0 / static_cast<double>(n);
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (!active[j]) continue;
            const double* cj = &cols[j * n];
            double corr = 0.0;
            for (std::size_t i = 0; i < n; ++i) corr += cj[i] * residual[i];
            const double rho = beta_std[j] + corr * inv_n;
            const double updated = soft_threshold(rho, lambda);
            const double delta = updated - beta_std[j];
            if (delta != 0.0) {
                beta_std[j] = updated;
                for (std::size_t i = 0; i < n; ++i) residual[i] -= delta * cj[i];
                max_delta = std::max(max_delta, std::abs(delta));
            }
        }
        if (max_delta < tol) break;
    }
    if (sweep == max_sweeps) {
        throw NotConverged("lasso did not converge in " + std::to_string(max_sweeps) +
                           " sweeps");
    }

    LinearModel model;
    model.n_sweeps = sweep + 1;
    model.beta.assign(d, 0.0);
    model.intercept = y_mean;
    for (std::size_t j = 0; j < d; ++j) {
        if (active[j] && beta_std[j] != 0.0) {
            model.beta[j] = beta_std[j] / sd[j];
            model.intercept -= model.beta[j] * mean[j];
        }
    }
    return model;
}

num::Matrix quad_expand(const num::Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    num::Matrix out(n, d * d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = x.row(r);
        double* dst = &out.row(r)[0];
        for (std::size_t i = 0; i < d; ++i) {
            const double vi = row[i];
            for (std::size_t j = 0; j < d; ++j) dst[i * d + j] = vi * row[j];
        }
    }
    return out;
}

LinearModel fit_quad_lasso(const num::Matrix& x, std::span<const double> y, double lambda) {
    LinearModel model = fit_lasso(quad_expand(x), y, lambda);
    model.quadratic = true;
    return model;
}

// ---------------------------------------------------------------------------
// trees

double TreeModel::predict(std::span<const double> x) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(at)];
        if (static_cast<std::size_t>(node.feature) >= x.size()) {
            throw DimensionMismatch("tree input has too few features");
        }
        at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
}

double ForestModel::predict(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& tree : trees) s += tree.predict(x);
    return s / static_cast<double>(trees.size());
}

double GbtModel::predict(std::span<const double> x) const {
    double v = base;
    for (const auto& tree : trees) v += learning_rate * tree.predict(x);
    return v;
}

namespace {

// Shared tree builder. Node membership is kept as one sorted index list per
// feature (sorted by feature value, ties by row index); partitioning those
// lists down the tree avoids re-sorting at every node.
class TreeBuilder {
public:
    TreeBuilder(const num::Matrix& x, std::span<const double> y, std::span<const double> w,
                int max_depth, int min_leaf, double feature_frac, num::SeededRng* rng)
        : x_(x),
          y_(y),
          w_(w),
          max_depth_(max_depth),
          min_leaf_(std::max(1, min_leaf)),
          feature_frac_(feature_frac),
          rng_(rng) {}

    TreeModel build(const std::vector<std::vector<int>>& root_columns) {
        TreeModel model;
        build_node(model.nodes, root_columns, 0);
        return model;
    }

    /// Sorted row-index lists per feature for a full matrix; computed once
    /// and reused across trees.
    static std::vector<std::vector<int>> sorted_columns(const num::Matrix& x) {
        std::vector<std::vector<int>> cols(x.cols());
        std::vector<int> base(x.rows());
        std::iota(base.begin(), base.end(), 0);
        for (std::size_t f = 0; f < x.cols(); ++f) {
            cols[f] = base;
            std::stable_sort(cols[f].begin(), cols[f].end(), [&](int a, int b) {
                return x(static_cast<std::size_t>(a), f) < x(static_cast<std::size_t>(b), f);
            });
        }
        return cols;
    }

private:
    struct Best {
        double cost = std::numeric_limits<double>::infinity();
        int feature = -1;
        double threshold = 0.0;
    };

    int build_node(std::vector<TreeNode>& nodes, const std::vector<std::vector<int>>& columns,
                   int depth) {
        double w_sum = 0.0, s_sum = 0.0, q_sum = 0.0;
        for (int row : columns[0]) {
            const double w = w_[static_cast<std::size_t>(row)];
            const double y = y_[static_cast<std::size_t>(row)];
            w_sum += w;
            s_sum += w * y;
            q_sum += w * y * y;
        }
        const double node_value = w_sum > 0.0 ? s_sum / w_sum : 0.0;
        const double node_sse = std::max(0.0, q_sum - (w_sum > 0.0 ? s_sum * s_sum / w_sum : 0.0));

        const int index = static_cast<int>(nodes.size());
        nodes.push_back({-1, 0.0, -1, -1, node_value});
        if (depth >= max_depth_ || w_sum < 2.0 * min_leaf_ || node_sse <= 1e-12) {
            return index;
        }

        Best best = find_best_split(columns, w_sum, s_sum, q_sum);
        if (best.feature < 0) return index;

        const std::size_t f_best = static_cast<std::size_t>(best.feature);
        std::vector<std::vector<int>> left_cols(columns.size());
        std::vector<std::vector<int>> right_cols(columns.size());
        for (std::size_t f = 0; f < columns.size(); ++f) {
            for (int row : columns[f]) {
                if (x_(static_cast<std::size_t>(row), f_best) <= best.threshold) {
                    left_cols[f].push_back(row);
                } else {
                    right_cols[f].push_back(row);
                }
            }
        }
        nodes[static_cast<std::size_t>(index)].feature = best.feature;
        nodes[static_cast<std::size_t>(index)].threshold = best.threshold;
        const int left = build_node(nodes, left_cols, depth + 1);
        nodes[static_cast<std::size_t>(index)].left = left;
        const int right = build_node(nodes, right_cols, depth + 1);
        nodes[static_cast<std::size_t>(index)].right = right;
        return index;
    }

    Best find_best_split(const std::vector<std::vector<int>>& columns, double w_sum, double s_sum,
                         double q_sum) {
        const std::size_t d = columns.size();
        std::vector<int> features;
        if (feature_frac_ >= 1.0 || rng_ == nullptr) {
            features.resize(d);
            std::iota(features.begin(), features.end(), 0);
        } else {
            // Partial Fisher-Yates draw of ceil(frac*d) distinct features,
            // scanned in ascending order for a stable tie-break.
            const std::size_t m = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil(feature_frac_ * static_cast<double>(d))));
            std::vector<int> pool(d);
            std::iota(pool.begin(), pool.end(), 0);
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng_->below(d - i));
                std::swap(pool[i], pool[j]);
            }
            features.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
            std::sort(features.begin(), features.end());
        }

        Best best;
        for (int f : features) {
            const auto& idx = columns[static_cast<std::size_t>(f)];
            double wl = 0.0, sl = 0.0, ql = 0.0;
            for (std::size_t pos = 0; pos + 1 < idx.size(); ++pos) {
                const int row = idx[pos];
                const double w = w_[static_cast<std::size_t>(row)];
                const double y = y_[static_cast<std::size_t>(row)];
                wl += w;
                sl += w * y;
                ql += w * y * y;
                const double v = x_(static_cast<std::size_t>(row), static_cast<std::size_t>(f));
                const double v_next =
                    x_(static_cast<std::size_t>(idx[pos + 1]), static_cast<std::size_t>(f));
                if (!(v < v_next)) continue;  // only between distinct values
                const double wr = w_sum - wl;
                if (wl < min_leaf_ || wr < min_leaf_) continue;
                const double sr = s_sum - sl;
                const double qr = q_sum - ql;
                const double cost = std::max(0.0, ql - sl * sl / wl) +
                                    std::max(0.0, qr - sr * sr / wr);
                if (cost < best.cost - 1e-12) {
                    best.cost = cost;
                    best.feature = f;
                    best.threshold = 0.5 * (v + v_next);
                }
            }
        }
        return best;
    }

    const num::Matrix& x_;
    std::span<const double> y_;
    std::span<const double> w_;
    int max_depth_;
    int min_leaf_;
    double feature_frac_;
    num::SeededRng* rng_;
};

}  // namespace

TreeModel fit_tree(const num::Matrix& x, std::span<const double> y, int max_depth, int min_leaf) {
    if (x.rows() == 0 || y.size() != x.rows()) throw DimensionMismatch("tree inputs misaligned");
    std::vector<double> weights(x.rows(), 1.0);
    TreeBuilder builder(x, y, weights, max_depth, min_leaf, 1.0, nullptr);
    return builder.build(TreeBuilder::sorted_columns(x));
}

ForestModel fit_random_forest(const num::Matrix& x, std::span<const double> y, int n_trees,
                              double feature_frac, bool bootstrap, num::SeededRng& rng,
                              int max_depth, int min_leaf) {
    if (n_trees < 1) throw Error("forest needs at least one tree");
    if (!(feature_frac > 0.0 && feature_frac <= 1.0)) {
        throw Error("feature_frac must be in (0, 1]");
    }
    const std::size_t n = x.rows();
    const auto base_columns = TreeBuilder::sorted_columns(x);

    ForestModel model;
    model.trees.resize(static_cast<std::size_t>(n_trees));
    for (int k = 0; k < n_trees; ++k) {
        num::SeededRng tree_rng = rng.derive(static_cast<std::uint64_t>(k));
        std::vector<double> weights(n, 1.0);
        if (bootstrap) {
            std::fill(weights.begin(), weights.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                weights[static_cast<std::size_t>(tree_rng.below(n))] += 1.0;
            }
        }
        TreeBuilder builder(x, y, weights, max_depth, min_leaf, feature_frac,
                            feature_frac < 1.0 ? &tree_rng : nullptr);
        model.trees[static_cast<std::size_t>(k)] = builder.build(base_columns);
    }
    return model;
}

GbtModel fit_gbt(const num::Matrix& x, std::span<const double> y, int n_stages,
                 double learning_rate, int max_depth, int min_leaf) {
    if (n_stages < 0) throw Error("gbt stage count must be non-negative");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw Error("gbt learning rate must be in (0, 1]");
    }
    const std::size_t n = x.rows();
    if (n == 0 || y.size() != n) throw DimensionMismatch("gbt inputs misaligned");

    GbtModel model;
    model.learning_rate = learning_rate;
    model.base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    std::vector<double> residual(y.begin(), y.end());
    for (auto& r : residual) r -= model.base;
    auto mse_of_residual = [&] {
        double s = 0.0;
        for (double r : residual) s += r * r;
        return s / static_cast<double>(n);
    };
    model.training_mse.push_back(mse_of_residual());

    const std::vector<double> weights(n, 1.0);
    const auto base_columns = TreeBuilder::sorted_columns(x);
    for (int stage = 0; stage < n_stages; ++stage) {
        TreeBuilder builder(x, residual, weights, max_depth, min_leaf, 1.0, nullptr);
        TreeModel tree = builder.build(base_columns);
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] -= learning_rate * tree.predict(x.row(i));
        }
        model.trees.push_back(std::move(tree));
        model.training_mse.push_back(mse_of_residual());
    }
    return model;
}

}  // namespace optiplan::qot
