// evmscan: bytecode-level smart-contract vulnerability scanner
// Copyright 2026 The evmscan Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "errors.hpp"
#include "matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace evmscan::gbdt
{
/// Boosting hyperparameters. `leaf_penalty` is the per-leaf cost and
/// `l2_weight` the L2 coefficient on leaf outputs in the regularized objective
///   sum_i l(y_i, yhat_i + f(x_i)) + leaf_penalty * T + 1/2 * l2_weight * sum_j w_j^2.
struct TrainConfig
{
    size_t n_trees = 200;
    double learning_rate = 0.1;
    size_t max_leaves = 31;
    size_t min_samples_leaf = 5;
    double leaf_penalty = 0.0;
    double l2_weight = 1.0;
    /// Recorded for provenance; growth is deterministic and draws no randomness.
    uint64_t seed = 0;

    void validate() const
    {
        if (n_trees < 1)
            throw ConfigError("n_trees must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw ConfigError("learning_rate must be in (0, 1]");
        if (max_leaves < 2)
            throw ConfigError("max_leaves must be >= 2");
        if (min_samples_leaf < 1)
            throw ConfigError("min_samples_leaf must be >= 1");
        if (!(leaf_penalty >= 0.0) || !(l2_weight >= 0.0))
            throw ConfigError("leaf_penalty and l2_weight must be non-negative");
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TreeNode
{
    /// -1 marks a leaf.
    int32_t feature = -1;
    double threshold = 0.0;
    int32_t left = -1;
    int32_t right = -1;
    /// Leaf output; unused on internal nodes.
    double weight = 0.0;
    /// Gain of the split made at this node; 0 on leaves.
    double gain = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary tree; node 0 is the root. Samples with x[feature] < threshold go left.
class DecisionTree
{
public:
    DecisionTree() : nodes_(1) {}
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

    size_t leaf_count() const noexcept
    {
        return static_cast<size_t>(
            std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
    }

    size_t leaf_index(std::span<const double> x) const noexcept
    {
        size_t i = 0;
        while (!nodes_[i].is_leaf())
        {
            const auto& n = nodes_[i];
            i = static_cast<size_t>(x[static_cast<size_t>(n.feature)] < n.threshold ? n.left : n.right);
        }
        return i;
    }

    double evaluate(std::span<const double> x) const noexcept { return nodes_[leaf_index(x)].weight; }

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<TreeNode> nodes_;
};

inline double sigmoid(double z) noexcept
{
    // The clamp keeps the output strictly inside (0, 1) even for infinite scores.
    z = std::clamp(z, -30.0, 30.0);
    return 1.0 / (1.0 + std::exp(-z));
}

/// Additive model: P(y = 1 | x) = sigmoid(base_score + learning_rate * sum_t tree_t(x)).
struct Ensemble
{
    std::vector<DecisionTree> trees;
    double base_score = 0.0;
    TrainConfig config;
    size_t n_features = 0;

    double raw_score(std::span<const double> x) const
    {
        if (x.size() != n_features)
            throw FeatureDimError("model expects " + std::to_string(n_features) +
                                  " features, got " + std::to_string(x.size()));
        double s = 0.0;
        for (const auto& t : trees)
            s += t.evaluate(x);
        return base_score + config.learning_rate * s;
    }

    double predict(std::span<const double> x) const { return sigmoid(raw_score(x)); }

    size_t total_leaves() const noexcept
    {
        size_t n = 0;
        for (const auto& t : trees)
            n += t.leaf_count();
        return n;
    }

    friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

namespace detail
{
inline double structure_score(double g, double h, double l2) noexcept
{
    const double denom = h + l2;
    return denom > 0.0 ? g * g / denom : 0.0;
}
}  // namespace detail

/// Reduction in the regularized objective from splitting a leaf into (L, R).
inline double split_gain(double g_left, double h_left, double g_right, double h_right,
    double l2_weight, double leaf_penalty) noexcept
{
    return 0.5 * (detail::structure_score(g_left, h_left, l2_weight) +
                     detail::structure_score(g_right, h_right, l2_weight) -
                     detail::structure_score(g_left + g_right, h_left + h_right, l2_weight)) -
           leaf_penalty;
}

/// Optimal leaf output -G / (H + l2); 0 when the denominator vanishes.
inline double leaf_weight(double g, double h, double l2_weight) noexcept
{
    const double denom = h + l2_weight;
    return denom > 0.0 ? -g / denom : 0.0;
}

/// Column-major copy of the training matrix with every column presorted.
class TrainingData
{
public:
    explicit TrainingData(const MatrixD& x) : n_rows_(x.rows()), columns_(x.cols()), order_(x.cols())
    {
        for (size_t f = 0; f < x.cols(); ++f)
        {
            auto& col = columns_[f];
            col.resize(n_rows_);
            for (size_t i = 0; i < n_rows_; ++i)
                col[i] = x(i, f);
            auto& ord = order_[f];
            ord.resize(n_rows_);
            std::iota(ord.begin(), ord.end(), uint32_t{0});
            std::sort(ord.begin(), ord.end(), [&col](uint32_t a, uint32_t b) {
                return col[a] < col[b] || (col[a] == col[b] && a < b);
            });
        }
    }

    size_t rows() const noexcept { return n_rows_; }
    size_t cols() const noexcept { return columns_.size(); }
    const std::vector<double>& column(size_t f) const noexcept { return columns_[f]; }
    const std::vector<uint32_t>& order(size_t f) const noexcept { return order_[f]; }

private:
    size_t n_rows_;
    std::vector<std::vector<double>> columns_;
    std::vector<std::vector<uint32_t>> order_;
};

namespace detail
{
struct SplitCandidate
{
    double gain = -std::numeric_limits<double>::infinity();
    int32_t feature = -1;
    double threshold = 0.0;

    bool valid() const noexcept { return feature >= 0; }
};

struct GrowingLeaf
{
    int32_t node = 0;
    /// Per feature, this leaf's samples in ascending feature-value order.
    std::vector<std::vector<uint32_t>> sorted;
    double g = 0.0;
    double h = 0.0;
    size_t count = 0;
    SplitCandidate best;
};

// Exact greedy scan. Features are visited in ascending index and thresholds in
// ascending value, and only a strictly larger gain replaces the incumbent, so
// ties resolve to the lowest feature index, then the lowest threshold.
/// Gains that differ only by summation rounding count as ties, so the
/// lowest-feature, lowest-threshold rule decides them regardless of row order.
inline bool clearly_greater(double a, double b) noexcept
{
    return a > b + 1e-10 * std::max(1.0, std::abs(b));
}

inline SplitCandidate find_best_split(const GrowingLeaf& leaf, const TrainingData& data,
    std::span<const double> grad, std::span<const double> hess, const TrainConfig& cfg)
{
    SplitCandidate best;
    const size_t n = leaf.count;
    const size_t msl = cfg.min_samples_leaf;
    if (n < 2 * msl)
        return best;
    for (size_t f = 0; f < data.cols(); ++f)
    {
        const auto& col = data.column(f);
        const auto& list = leaf.sorted[f];
        if (col[list.front()] == col[list.back()])
            continue;
        double gl = 0.0, hl = 0.0;
        for (size_t p = 0; p + 1 < n; ++p)
        {
            gl += grad[list[p]];
            hl += hess[list[p]];
            const double v = col[list[p]];
            const double next = col[list[p + 1]];
            const size_t n_left = p + 1;
            if (!(v < next) || n_left < msl || n - n_left < msl)
                continue;
            const double gain = split_gain(gl, hl, leaf.g - gl, leaf.h - hl, cfg.l2_weight, cfg.leaf_penalty);
            if (gain > 0.0 && (!best.valid() || clearly_greater(gain, best.gain)))
            {
                best.gain = gain;
                best.feature = static_cast<int32_t>(f);
                best.threshold = v + (next - v) / 2.0;
            }
        }
    }
    return best;
}

inline void accumulate(GrowingLeaf& leaf, std::span<const double> grad, std::span<const double> hess)
{
    leaf.g = 0.0;
    leaf.h = 0.0;
    // Accumulate in sample-index order so the sums do not depend on which
    // feature list is used.
    std::vector<uint32_t> ids = leaf.sorted.empty() ? std::vector<uint32_t>{} : leaf.sorted[0];
    std::sort(ids.begin(), ids.end());
    for (const auto i : ids)
    {
        leaf.g += grad[i];
        leaf.h += hess[i];
    }
    leaf.count = ids.size();
}
}  // namespace detail

/// Grows one tree leaf-wise: repeatedly splits the leaf whose best split has
/// the highest gain until that gain is <= 0, the leaf budget is reached, or no
/// split satisfies min_samples_leaf. With zero features the tree is one leaf.
inline DecisionTree grow_tree(const TrainingData& data, std::span<const double> grad,
    std::span<const double> hess, const TrainConfig& cfg)
{
    std::vector<TreeNode> nodes(1);
    std::vector<detail::GrowingLeaf> leaves(1);
    {
        auto& root = leaves[0];
        root.node = 0;
        if (data.cols() == 0)
        {
            // No features: still need the sample set for the leaf statistics.
            root.sorted.emplace_back(data.rows());
            std::iota(root.sorted[0].begin(), root.sorted[0].end(), uint32_t{0});
            detail::accumulate(root, grad, hess);
            nodes[0].weight = leaf_weight(root.g, root.h, cfg.l2_weight);
            return DecisionTree(std::move(nodes));
        }
        root.sorted.reserve(data.cols());
        for (size_t f = 0; f < data.cols(); ++f)
            root.sorted.push_back(data.order(f));
        detail::accumulate(root, grad, hess);
        root.best = detail::find_best_split(root, data, grad, hess, cfg);
    }

    while (leaves.size() < cfg.max_leaves)
    {
        size_t pick = leaves.size();
        for (size_t i = 0; i < leaves.size(); ++i)
        {
            const auto& b = leaves[i].best;
            if (!b.valid() || !(b.gain > 0.0))
                continue;
            if (pick == leaves.size() || detail::clearly_greater(b.gain, leaves[pick].best.gain) ||
                (!detail::clearly_greater(leaves[pick].best.gain, b.gain) && leaves[i].node < leaves[pick].node))
                pick = i;
        }
        if (pick == leaves.size())
            break;

        auto parent = std::move(leaves[pick]);
        const auto& split_col = data.column(static_cast<size_t>(parent.best.feature));
        const double thr = parent.best.threshold;

        detail::GrowingLeaf left, right;
        left.sorted.resize(data.cols());
        right.sorted.resize(data.cols());
        for (size_t f = 0; f < data.cols(); ++f)
        {
            for (const auto i : parent.sorted[f])
                (split_col[i] < thr ? left.sorted[f] : right.sorted[f]).push_back(i);
        }
        left.node = static_cast<int32_t>(nodes.size());
        right.node = left.node + 1;
        auto& pn = nodes[static_cast<size_t>(parent.node)];
        pn.feature = parent.best.feature;
        pn.threshold = thr;
        pn.gain = parent.best.gain;
        pn.left = left.node;
        pn.right = right.node;
        nodes.emplace_back();
        nodes.emplace_back();

        detail::accumulate(left, grad, hess);
        detail::accumulate(right, grad, hess);
        left.best = detail::find_best_split(left, data, grad, hess, cfg);
        right.best = detail::find_best_split(right, data, grad, hess, cfg);

        leaves[pick] = std::move(left);
        leaves.push_back(std::move(right));
    }

    for (const auto& leaf : leaves)
        nodes[static_cast<size_t>(leaf.node)].weight = leaf_weight(leaf.g, leaf.h, cfg.l2_weight);
    return DecisionTree(std::move(nodes));
}

/// Mean binary logistic loss of raw scores against labels.
inline double logistic_loss(std::span<const double> scores, std::span<const double> labels) noexcept
{
    double total = 0.0;
    for (size_t i = 0; i < scores.size(); ++i)
    {
        const double s = scores[i];
        // log(1 + e^s) - y s, written to avoid overflow.
        const double softplus = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
        total += softplus - labels[i] * s;
    }
    return scores.empty() ? 0.0 : total / static_cast<double>(scores.size());
}

/// Per-round diagnostics: loss[0] is the base-score loss, loss[t] after t trees.
struct TrainLog
{
    std::vector<double> loss;
};

/// Second-order boosting on the binary logistic loss. Labels are 0/1.
inline Ensemble train(const MatrixD& x, std::span<const double> y, const TrainConfig& cfg,
    TrainLog* log = nullptr)
{
    cfg.validate();
    if (x.rows() != y.size())
        throw FeatureDimError(std::to_string(x.rows()) + " rows but " + std::to_string(y.size()) + " labels");
    if (y.empty())
        throw EmptyTrainingSet("no training samples");

    double positives = 0.0;
    for (const double v : y)
    {
        if (v != 0.0 && v != 1.0)
            throw DegenerateLabels("labels must be 0 or 1");
        positives += v;
    }
    const auto n = static_cast<double>(y.size());
    if (positives == 0.0 || positives == n)
        throw DegenerateLabels("training labels contain a single class");

    Ensemble model;
    model.config = cfg;
    model.n_features = x.cols();
    const double mean = positives / n;
    model.base_score = std::log(mean / (1.0 - mean));

    const TrainingData data(x);
    std::vector<double> scores(y.size(), model.base_score);
    std::vector<double> grad(y.size()), hess(y.size());
    if (log)
        log->loss.assign(1, logistic_loss(scores, y));

    model.trees.reserve(cfg.n_trees);
    for (size_t t = 0; t < cfg.n_trees; ++t)
    {
        for (size_t i = 0; i < y.size(); ++i)
        {
            const double p = sigmoid(scores[i]);
            grad[i] = p - y[i];
            hess[i] = p * (1.0 - p);
        }
        auto tree = grow_tree(data, grad, hess, cfg);
        for (size_t i = 0; i < y.size(); ++i)
            scores[i] += cfg.learning_rate * tree.evaluate(x.row(i));
        model.trees.push_back(std::move(tree));
        if (log)
            log->loss.push_back(logistic_loss(scores, y));
    }
    return model;
}

}  // namespace evmscan::gbdt
