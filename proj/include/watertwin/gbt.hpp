#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "watertwin/features.hpp"
#include "watertwin/forecast.hpp"
#include "watertwin/metrics.hpp"
#include "watertwin/rng.hpp"
#include "watertwin/transform.hpp"

namespace watertwin::models {

struct GbtParams {
    enum class Growth { leafwise, depthwise };

    Growth growth = Growth::leafwise;
    int num_leaves = 31;     // leaf-wise cap
    int max_depth = 6;       // depth-wise cap
    int n_rounds = 200;
    double learning_rate = 0.1;
    int min_samples_leaf = 5;
    double lambda_l2 = 0.0;       // shrinks leaf values
    double alpha_l1 = 0.0;        // soft-thresholds leaf sums
    double min_split_gain = 0.0;  // subtracted from every candidate gain
    double bagging_fraction = 1.0;
    int bagging_freq = 1;  // rounds between row re-draws when bagging
    double feature_fraction = 1.0;
    double validation_fraction = 0.0;  // chronological tail used for the valid trace
    int early_stopping_rounds = 0;     // 0 disables
    std::uint64_t seed = 42;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict_row(const std::vector<double>& x) const {
        int n = 0;
        while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
            const auto& nd = nodes[static_cast<std::size_t>(n)];
            n = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(n)].value;
    }

    int leaf_count() const {
        int k = 0;
        for (const auto& n : nodes) k += n.is_leaf();
        return k;
    }

    int depth() const {
        std::vector<int> d(nodes.size(), 0);
        int best = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].is_leaf()) {
                best = std::max(best, d[i]);
                continue;
            }
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
        return best;
    }
};

namespace gbt_detail {

inline double soft_threshold(double g, double alpha) {
    if (g > alpha) return g - alpha;
    if (g < -alpha) return g + alpha;
    return 0.0;
}

inline double leaf_score(double sum, std::size_t n, const GbtParams& p) {
    double t = soft_threshold(sum, p.alpha_l1);
    return t * t / (static_cast<double>(n) + p.lambda_l2);
}

inline double leaf_value(double sum, std::size_t n, const GbtParams& p) {
    return soft_threshold(sum, p.alpha_l1) / (static_cast<double>(n) + p.lambda_l2);
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> left_rows, right_rows;
};

/// Exact greedy split over midpoints between consecutive distinct feature
/// values. Gain is the reduction of the regularized leaf objective minus
/// min_split_gain; with no regularization that is plain variance reduction.
inline SplitChoice best_split(const features::FeatureMatrix& m, const std::vector<double>& residual,
                              const std::vector<std::size_t>& rows,
                              const std::vector<int>& feature_ids, const GbtParams& p) {
    SplitChoice best;
    if (rows.size() < 2 * static_cast<std::size_t>(p.min_samples_leaf)) return best;

    double total = 0.0;
    for (std::size_t r : rows) total += residual[r];
    double parent = leaf_score(total, rows.size(), p);

    std::vector<std::size_t> order(rows);
    for (int f : feature_ids) {
        const auto& col = m.columns[static_cast<std::size_t>(f)];
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
        double left_sum = 0.0;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            left_sum += residual[order[i]];
            if (col[order[i]] == col[order[i + 1]]) continue;  // not a boundary
            std::size_t n_left = i + 1, n_right = order.size() - n_left;
            if (n_left < static_cast<std::size_t>(p.min_samples_leaf) ||
                n_right < static_cast<std::size_t>(p.min_samples_leaf))
                continue;
            double gain = leaf_score(left_sum, n_left, p) +
                          leaf_score(total - left_sum, n_right, p) - parent - p.min_split_gain;
            if (gain > best.gain + 1e-15) {
                best.found = true;
                best.gain = gain;
                best.feature = f;
                best.threshold = 0.5 * (col[order[i]] + col[order[i + 1]]);
                best.left_rows.assign(order.begin(), order.begin() + static_cast<long>(n_left));
                best.right_rows.assign(order.begin() + static_cast<long>(n_left), order.end());
            }
        }
    }
    if (best.found && best.gain <= 0.0) best.found = false;
    return best;
}

struct OpenLeaf {
    int node = 0;
    int depth = 0;
    std::vector<std::size_t> rows;
    SplitChoice split;
    std::uint64_t order = 0;  // insertion sequence, for deterministic ties
};

}  // namespace gbt_detail

/// One regression tree on the residuals, grown best-first. Leaf-wise growth
/// stops at num_leaves; depth-wise growth refuses splits below max_depth.
inline RegressionTree fit_tree(const features::FeatureMatrix& m, const std::vector<double>& residual,
                               const std::vector<std::size_t>& rows,
                               const std::vector<int>& feature_ids, const GbtParams& p) {
    using gbt_detail::OpenLeaf;
    RegressionTree tree;
    double total = 0.0;
    for (std::size_t r : rows) total += residual[r];
    tree.nodes.push_back({-1, 0.0, -1, -1, gbt_detail::leaf_value(total, rows.size(), p)});

    auto better = [](const OpenLeaf& a, const OpenLeaf& b) {
        if (a.split.gain != b.split.gain) return a.split.gain > b.split.gain;
        return a.order < b.order;
    };
    std::vector<OpenLeaf> open;
    std::uint64_t seq = 0;

    auto consider = [&](int node, int depth, std::vector<std::size_t>&& node_rows) {
        if (p.growth == GbtParams::Growth::depthwise && depth >= p.max_depth) return;
        auto split = gbt_detail::best_split(m, residual, node_rows, feature_ids, p);
        if (!split.found) return;
        open.push_back({node, depth, std::move(node_rows), std::move(split), seq++});
    };
    consider(0, 0, std::vector<std::size_t>(rows));

    int leaves = 1;
    int leaf_cap = p.growth == GbtParams::Growth::leafwise ? p.num_leaves
                                                           : std::numeric_limits<int>::max();
    while (!open.empty() && leaves < leaf_cap) {
        auto it = std::min_element(open.begin(), open.end(),
                                   [&](const OpenLeaf& a, const OpenLeaf& b) { return better(a, b); });
        OpenLeaf leaf = std::move(*it);
        open.erase(it);

        auto& nd = tree.nodes[static_cast<std::size_t>(leaf.node)];
        nd.feature = leaf.split.feature;
        nd.threshold = leaf.split.threshold;
        nd.left = static_cast<int>(tree.nodes.size());
        nd.right = nd.left + 1;

        double ls = 0.0, rs = 0.0;
        for (std::size_t r : leaf.split.left_rows) ls += residual[r];
        for (std::size_t r : leaf.split.right_rows) rs += residual[r];
        tree.nodes.push_back(
            {-1, 0.0, -1, -1, gbt_detail::leaf_value(ls, leaf.split.left_rows.size(), p)});
        tree.nodes.push_back(
            {-1, 0.0, -1, -1, gbt_detail::leaf_value(rs, leaf.split.right_rows.size(), p)});
        ++leaves;

        int left = tree.nodes[static_cast<std::size_t>(leaf.node)].left;
        consider(left, leaf.depth + 1, std::move(leaf.split.left_rows));
        consider(left + 1, leaf.depth + 1, std::move(leaf.split.right_rows));
    }
    return tree;
}

struct BoostRound {
    double train_mse = 0.0;
    double valid_mse = std::numeric_limits<double>::quiet_NaN();
};

struct GbtFit {
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;
    std::vector<std::string> feature_names;
    std::vector<BoostRound> trace;  // one entry per round actually run
    int best_round = 0;             // trees kept after early stopping

    double predict_row(const std::vector<double>& x) const {
        double acc = base_score;
        for (const auto& t : trees) acc += learning_rate * t.predict_row(x);
        return acc;
    }

    /// Column names must match training exactly (same features, same order).
    std::vector<double> predict(const features::FeatureMatrix& m) const {
        if (m.names != feature_names) {
            std::string got;
            for (const auto& n : m.names) got += (got.empty() ? "" : ",") + n;
            std::string want;
            for (const auto& n : feature_names) want += (want.empty() ? "" : ",") + n;
            throw std::invalid_argument("feature columns [" + got +
                                        "] do not match the trained model [" + want + "]");
        }
        std::vector<double> out;
        out.reserve(m.rows());
        for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(predict_row(m.row(r)));
        return out;
    }
};

/// Gradient boosting with squared loss: each round fits one tree to the
/// current residuals and steps the prediction by the learning rate.
inline GbtFit boost(const features::FeatureMatrix& m, const GbtParams& p) {
    if (m.rows() < 2) throw std::invalid_argument("boosting needs at least 2 rows");
    if (p.n_rounds < 1) throw std::invalid_argument("n_rounds must be >= 1");
    if (!(p.learning_rate > 0.0 && p.learning_rate <= 1.0))
        throw std::invalid_argument("learning rate must be in (0, 1]");
    if (!(p.bagging_fraction > 0.0 && p.bagging_fraction <= 1.0) ||
        !(p.feature_fraction > 0.0 && p.feature_fraction <= 1.0))
        throw std::invalid_argument("sampling fractions must be in (0, 1]");
    if (p.validation_fraction < 0.0 || p.validation_fraction >= 1.0)
        throw std::invalid_argument("validation fraction must be in [0, 1)");

    std::size_t n_valid = static_cast<std::size_t>(
        std::floor(p.validation_fraction * static_cast<double>(m.rows())));
    std::size_t n_train = m.rows() - n_valid;
    if (n_train < 2) throw std::invalid_argument("validation split leaves too little training data");
    if (p.early_stopping_rounds > 0 && n_valid == 0)
        throw std::invalid_argument("early stopping needs a validation fraction");

    GbtFit fit;
    fit.learning_rate = p.learning_rate;
    fit.feature_names = m.names;
    double ysum = 0.0;
    for (std::size_t r = 0; r < n_train; ++r) ysum += m.y[r];
    fit.base_score = ysum / static_cast<double>(n_train);

    std::vector<double> pred(m.rows(), fit.base_score);
    std::vector<double> residual(m.rows(), 0.0);
    Rng rng(p.seed);

    std::vector<std::size_t> all_rows(n_train);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    std::vector<std::size_t> bag = all_rows;
    std::vector<int> all_features(m.n_features());
    std::iota(all_features.begin(), all_features.end(), 0);

    auto mse_over = [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t r = lo; r < hi; ++r) {
            double d = m.y[r] - pred[r];
            acc += d * d;
        }
        return acc / static_cast<double>(hi - lo);
    };

    double best_valid = std::numeric_limits<double>::infinity();
    int best_valid_round = 0;
    int rounds_since_best = 0;

    for (int round = 0; round < p.n_rounds; ++round) {
        if (p.bagging_fraction < 1.0 && round % std::max(1, p.bagging_freq) == 0) {
            std::vector<std::size_t> pool = all_rows;
            rng.shuffle(pool);
            std::size_t keep = std::max<std::size_t>(
                2, static_cast<std::size_t>(std::floor(p.bagging_fraction *
                                                       static_cast<double>(n_train))));
            bag.assign(pool.begin(), pool.begin() + static_cast<long>(keep));
            std::sort(bag.begin(), bag.end());
        }
        std::vector<int> feats = all_features;
        if (p.feature_fraction < 1.0) {
            rng.shuffle(feats);
            std::size_t keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(p.feature_fraction *
                                                       static_cast<double>(feats.size()))));
            feats.resize(keep);
            std::sort(feats.begin(), feats.end());
        }

        for (std::size_t r = 0; r < m.rows(); ++r) residual[r] = m.y[r] - pred[r];
        auto tree = fit_tree(m, residual, bag, feats, p);
        for (std::size_t r = 0; r < m.rows(); ++r)
            pred[r] += p.learning_rate * tree.predict_row(m.row(r));
        fit.trees.push_back(std::move(tree));

        BoostRound tr;
        tr.train_mse = mse_over(0, n_train);
        if (n_valid > 0) tr.valid_mse = mse_over(n_train, m.rows());
        fit.trace.push_back(tr);

        if (n_valid > 0) {
            if (tr.valid_mse < best_valid - 1e-15) {
                best_valid = tr.valid_mse;
                best_valid_round = round + 1;
                rounds_since_best = 0;
            } else if (p.early_stopping_rounds > 0 &&
                       ++rounds_since_best >= p.early_stopping_rounds) {
                break;
            }
        }
    }
    // only early stopping discards trees; a plain validation trace keeps all
    fit.best_round = p.early_stopping_rounds > 0 ? best_valid_round
                                                 : static_cast<int>(fit.trace.size());
    fit.trees.resize(static_cast<std::size_t>(fit.best_round));
    return fit;
}

// ---------------------------------------------------------------------------
// time-series cross-validation and randomized hyperparameter search

struct CvFold {
    std::size_t train_end = 0;  // train rows [0, train_end)
    std::size_t valid_end = 0;  // valid rows [train_end, valid_end)
};

/// k expanding-window folds: boundaries at i*n/(k+1), so every fold trains
/// on a strict prefix and validates on the block that follows it.
inline std::vector<CvFold> expanding_folds(std::size_t n_rows, int k) {
    if (k < 1) throw std::invalid_argument("need at least one fold");
    if (n_rows < static_cast<std::size_t>(k + 1) * 2)
        throw std::invalid_argument("too few rows for " + std::to_string(k) + " folds");
    std::vector<CvFold> folds;
    for (int f = 1; f <= k; ++f) {
        std::size_t a = n_rows * static_cast<std::size_t>(f) / static_cast<std::size_t>(k + 1);
        std::size_t b = n_rows * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(k + 1);
        folds.push_back({a, b});
    }
    return folds;
}

struct SearchSpace {
    std::vector<double> learning_rates = {0.01, 0.05, 0.1};
    std::vector<int> num_leaves = {7, 15, 31};
    std::vector<int> max_depths = {3, 5, 7};
    std::vector<double> fractions = {0.8, 1.0};  // bagging and feature, drawn independently
    std::vector<double> lambdas = {0.0, 1.0, 5.0};
};

struct SearchDraw {
    GbtParams params;
    std::vector<double> fold_mae;
    double mean_mae = 0.0;
};

struct SearchResult {
    GbtParams best;
    std::size_t best_index = 0;
    std::vector<SearchDraw> table;
};

/// Randomized search scored by mean validation MAE over expanding folds.
/// Draws are seeded and reproducible; the best draw wins, earliest on ties.
inline SearchResult randomized_search(const features::FeatureMatrix& m, const GbtParams& base,
                                      int n_draws, int k_folds, std::uint64_t seed,
                                      const SearchSpace& space = {}) {
    if (n_draws < 1) throw std::invalid_argument("need at least one draw");
    auto folds = expanding_folds(m.rows(), k_folds);
    Rng rng(seed);

    SearchResult result;
    double best_mae = std::numeric_limits<double>::infinity();
    for (int d = 0; d < n_draws; ++d) {
        GbtParams p = base;
        p.learning_rate = space.learning_rates[rng.below(space.learning_rates.size())];
        p.num_leaves = space.num_leaves[rng.below(space.num_leaves.size())];
        p.max_depth = space.max_depths[rng.below(space.max_depths.size())];
        p.bagging_fraction = space.fractions[rng.below(space.fractions.size())];
        p.feature_fraction = space.fractions[rng.below(space.fractions.size())];
        p.lambda_l2 = space.lambdas[rng.below(space.lambdas.size())];
        p.seed = rng.next_u64();
        p.validation_fraction = 0.0;
        p.early_stopping_rounds = 0;

        SearchDraw draw;
        draw.params = p;
        double acc = 0.0;
        for (const auto& fold : folds) {
            auto train = m.take(0, fold.train_end);
            auto valid = m.take(fold.train_end, fold.valid_end);
            auto fit = boost(train, p);
            double fold_mae = eval::mae(valid.y, fit.predict(valid));
            draw.fold_mae.push_back(fold_mae);
            acc += fold_mae;
        }
        draw.mean_mae = acc / static_cast<double>(folds.size());
        if (draw.mean_mae < best_mae) {
            best_mae = draw.mean_mae;
            result.best = p;
            result.best_index = static_cast<std::size_t>(d);
        }
        result.table.push_back(std::move(draw));
    }
    return result;
}

// ---------------------------------------------------------------------------
// stacking

/// Weights on the probability simplex minimizing squared error of the blend.
/// Solved exactly by enumerating active sets (member counts are tiny); ties
/// prefer the larger support with equal weights, so identical members split
/// evenly. If the squared-error optimum would still lose to a single member
/// on MAE over the window, the weights snap to that member.
inline std::vector<double> fit_stacking_weights(const std::vector<std::vector<double>>& member_preds,
                                                const std::vector<double>& y) {
    std::size_t m = member_preds.size();
    if (m < 2) throw std::invalid_argument("stacking needs at least two members");
    for (const auto& p : member_preds)
        if (p.size() != y.size())
            throw std::invalid_argument("member prediction length does not match the window");
    std::size_t n = y.size();
    if (n == 0) throw std::invalid_argument("empty blend window");

    auto sse_of = [&](const std::vector<double>& w) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double p = 0.0;
            for (std::size_t j = 0; j < m; ++j) p += w[j] * member_preds[j][i];
            double d = y[i] - p;
            acc += d * d;
        }
        return acc;
    };
    auto mae_of = [&](const std::vector<double>& w) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double p = 0.0;
            for (std::size_t j = 0; j < m; ++j) p += w[j] * member_preds[j][i];
            acc += std::fabs(y[i] - p);
        }
        return acc / static_cast<double>(n);
    };

    std::vector<double> best_w;
    double best_sse = std::numeric_limits<double>::infinity();
    std::size_t best_support = 0;
    auto offer = [&](const std::vector<double>& w) {
        for (double v : w)
            if (!(v >= -1e-12)) return;
        std::vector<double> cw = w;
        double sum = 0.0;
        for (double& v : cw) {
            v = std::max(0.0, v);
            sum += v;
        }
        if (sum <= 0.0) return;
        for (double& v : cw) v /= sum;
        double s = sse_of(cw);
        std::size_t support = 0;
        for (double v : cw) support += v > 0.0;
        if (s < best_sse - 1e-12 || (s < best_sse + 1e-12 && support > best_support)) {
            best_sse = s;
            best_w = cw;
            best_support = support;
        }
    };

    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        std::vector<std::size_t> active;
        for (std::size_t j = 0; j < m; ++j)
            if (mask & (1u << j)) active.push_back(j);
        std::size_t k = active.size();

        // equal weights over the subset, as the degenerate-tie candidate
        std::vector<double> uniform(m, 0.0);
        for (std::size_t j : active) uniform[j] = 1.0 / static_cast<double>(k);
        offer(uniform);
        if (k == 1) continue;

        // least squares with the sum-to-one constraint via its KKT system
        std::vector<std::vector<double>> A(k + 1, std::vector<double>(k + 2, 0.0));
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b)
                for (std::size_t i = 0; i < n; ++i)
                    A[a][b] += member_preds[active[a]][i] * member_preds[active[b]][i];
            A[a][k] = 1.0;  // multiplier column
            for (std::size_t i = 0; i < n; ++i) A[a][k + 1] += member_preds[active[a]][i] * y[i];
        }
        for (std::size_t b = 0; b < k; ++b) A[k][b] = 1.0;
        A[k][k + 1] = 1.0;

        // Gaussian elimination with partial pivoting
        bool singular = false;
        for (std::size_t col = 0; col <= k && !singular; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r <= k; ++r)
                if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
            if (std::fabs(A[piv][col]) < 1e-12) {
                singular = true;
                break;
            }
            std::swap(A[piv], A[col]);
            for (std::size_t r = 0; r <= k; ++r) {
                if (r == col) continue;
                double f = A[r][col] / A[col][col];
                for (std::size_t c = col; c <= k + 1; ++c) A[r][c] -= f * A[col][c];
            }
        }
        if (singular) continue;
        std::vector<double> w(m, 0.0);
        for (std::size_t a = 0; a < k; ++a) w[active[a]] = A[a][k + 1] / A[a][a];
        offer(w);
    }

    // never let the blend lose to a member on the window's MAE
    double blend_mae = mae_of(best_w);
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> vertex(m, 0.0);
        vertex[j] = 1.0;
        if (mae_of(vertex) < blend_mae - 1e-12) {
            blend_mae = mae_of(vertex);
            best_w = vertex;
        }
    }
    return best_w;
}

/// Boosted-tree forecaster: engineers features from the frame, then boosts.
class GbtModel : public ForecastModel {
public:
    GbtModel(features::FeatureSpec fspec, GbtParams params, std::string model_name = "")
        : fspec_(std::move(fspec)), params_(params), name_(std::move(model_name)) {
        if (name_.empty())
            name_ = params_.growth == GbtParams::Growth::leafwise ? "gbt_leafwise"
                                                                  : "gbt_depthwise";
    }

    std::string name() const override { return name_; }

    void train(const data::TimeSeriesFrame& frame) override {
        auto m = features::assemble(frame, fspec_);
        fit_ = std::make_shared<GbtFit>(boost(m, params_));
    }

    std::vector<double> predict(const data::TimeSeriesFrame& frame, std::size_t begin,
                                std::size_t end) const override {
        if (!fit_) throw std::logic_error("predict before train");
        if (begin >= end || end > frame.rows()) throw std::out_of_range("bad prediction range");
        auto m = features::assemble(frame, fspec_);
        std::size_t first = 0;
        while (first < m.rows() && m.dates[first] < frame.dates[begin]) ++first;
        std::size_t expect = end - begin;
        if (first + expect > m.rows() ||
            (first < m.rows() && m.dates[first] != frame.dates[begin]))
            throw std::invalid_argument("cannot build features for the requested rows "
                                        "(missing values or not enough history)");
        auto sub = m.take(first, first + expect);
        for (std::size_t i = 0; i < expect; ++i)
            if (sub.dates[i] != frame.dates[begin + i])
                throw std::invalid_argument("feature rows skip " +
                                            frame.dates[begin + i].to_string() +
                                            " (missing values in the frame)");
        return fit_->predict(sub);
    }

    const GbtFit& fit() const {
        if (!fit_) throw std::logic_error("no fit yet");
        return *fit_;
    }

private:
    features::FeatureSpec fspec_;
    GbtParams params_;
    std::string name_;
    std::shared_ptr<GbtFit> fit_;
};

/// Convex blend of member forecasters. Members first train on the leading
/// 80% of the training frame so the trailing 20% can price the blend, then
/// retrain on the full frame with the weights kept.
class StackingModel : public ForecastModel {
public:
    StackingModel(std::vector<std::shared_ptr<ForecastModel>> members,
                  std::string target = "consumption_m3", double blend_fraction = 0.2)
        : members_(std::move(members)), target_(std::move(target)), blend_fraction_(blend_fraction) {
        if (members_.size() < 2) throw std::invalid_argument("stacking needs at least two members");
        if (!(blend_fraction_ > 0.0 && blend_fraction_ < 1.0))
            throw std::invalid_argument("blend fraction must be in (0, 1)");
    }

    std::string name() const override { return "stacking"; }

    void train(const data::TimeSeriesFrame& frame) override {
        std::size_t blend_begin = frame.rows() - static_cast<std::size_t>(std::floor(
                                                     blend_fraction_ *
                                                     static_cast<double>(frame.rows())));
        if (blend_begin == 0 || blend_begin >= frame.rows())
            throw std::invalid_argument("training frame too small to carve a blend window");

        auto core = data::take_rows(frame, 0, blend_begin);
        std::vector<std::vector<double>> preds;
        for (auto& mref : members_) {
            mref->train(core);
            preds.push_back(mref->predict(frame, blend_begin, frame.rows()));
        }
        const auto& y = frame.column(target_);
        std::vector<double> actual(y.begin() + static_cast<long>(blend_begin), y.end());
        weights_ = fit_stacking_weights(preds, actual);

        for (auto& mref : members_) mref->train(frame);
        trained_ = true;
    }

    std::vector<double> predict(const data::TimeSeriesFrame& frame, std::size_t begin,
                                std::size_t end) const override {
        if (!trained_) throw std::logic_error("predict before train");
        std::vector<double> out(end - begin, 0.0);
        for (std::size_t j = 0; j < members_.size(); ++j) {
            if (weights_[j] == 0.0) continue;
            auto p = members_[j]->predict(frame, begin, end);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights_[j] * p[i];
        }
        return out;
    }

    const std::vector<double>& weights() const {
        if (!trained_) throw std::logic_error("no fit yet");
        return weights_;
    }

private:
    std::vector<std::shared_ptr<ForecastModel>> members_;
    std::string target_;
    double blend_fraction_;
    std::vector<double> weights_;
    bool trained_ = false;
};

}  // namespace watertwin::models
