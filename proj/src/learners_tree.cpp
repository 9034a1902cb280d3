#include <algorithm>
#include <cmath>
#include <numeric>

#include "covsel/learners.hpp"
#include "covsel/rng.hpp"

namespace covsel {

double gini(std::uint64_t c0, std::uint64_t c1) {
    if (c0 + c1 == 0)
        throw EmptyNode("gini of an empty node");
    double n = static_cast<double>(c0 + c1);
    double p0 = static_cast<double>(c0) / n;
    double p1 = static_cast<double>(c1) / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
};

// Best threshold on one feature by Gini decrease; ties keep the lowest
// threshold. Returns found=false when the feature has a single distinct
// value among the rows.
SplitChoice best_threshold(const Dataset& data, const std::vector<std::uint32_t>& rows,
                           int feature, double parent_gini) {
    std::vector<std::pair<double, int>> vals;
    vals.reserve(rows.size());
    for (std::uint32_t r : rows)
        vals.emplace_back(data.at(r, feature), data.y[r]);
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    SplitChoice best;
    std::uint64_t total0 = 0, total1 = 0;
    for (const auto& [v, label] : vals)
        label ? ++total1 : ++total0;
    double n = static_cast<double>(vals.size());

    std::uint64_t left0 = 0, left1 = 0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        vals[i].second ? ++left1 : ++left0;
        if (vals[i].first == vals[i + 1].first)
            continue;
        std::uint64_t nl = left0 + left1, nr = vals.size() - nl;
        double child = (static_cast<double>(nl) / n) * gini(left0, left1) +
                       (static_cast<double>(nr) / n) * gini(total0 - left0, total1 - left1);
        double gain = parent_gini - child;
        if (!best.found || gain > best.gain) {
            best.found = true;
            best.feature = feature;
            best.threshold = (vals[i].first + vals[i + 1].first) / 2.0;
            best.gain = gain;
        }
    }
    return best;
}

struct GrowContext {
    const Dataset* data;
    const CartParams* params;
    Rng* rng;                                   // random splitter only
    const std::vector<int>* feature_pool;       // forest per-split subsets
    std::size_t features_per_split = 0;         // 0 = all
};

std::unique_ptr<TreeNode> grow(const GrowContext& ctx, std::vector<std::uint32_t>& rows,
                               std::size_t depth) {
    const Dataset& data = *ctx.data;
    auto node = std::make_unique<TreeNode>();
    std::uint64_t c0 = 0, c1 = 0;
    for (std::uint32_t r : rows)
        data.y[r] ? ++c1 : ++c0;
    node->n_samples = rows.size();
    node->class_counts = {c0, c1};
    node->gini_value = gini(c0, c1);
    node->predicted_class = c1 > c0 ? 1 : 0;

    bool depth_ok = !ctx.params->max_depth || depth < *ctx.params->max_depth;
    if (!depth_ok || c0 == 0 || c1 == 0 || rows.size() < ctx.params->min_samples_split)
        return node;

    std::vector<int> candidates;
    if (ctx.features_per_split > 0 && ctx.features_per_split < data.cols) {
        candidates.reserve(ctx.features_per_split);
        auto picks = ctx.rng->sample_without_replacement(data.cols, ctx.features_per_split);
        for (std::size_t p : picks)
            candidates.push_back(static_cast<int>(p));
        std::sort(candidates.begin(), candidates.end());
    } else {
        candidates.resize(data.cols);
        std::iota(candidates.begin(), candidates.end(), 0);
    }

    SplitChoice best;
    if (ctx.params->splitter == Splitter::Best) {
        for (int f : candidates) {
            SplitChoice c = best_threshold(data, rows, f, node->gini_value);
            if (c.found && (!best.found || c.gain > best.gain))
                best = c;
        }
    } else {
        // Uniformly draw the feature among those that can split at all, then
        // take the best threshold on it.
        std::vector<int> splittable;
        for (int f : candidates) {
            double first = data.at(rows[0], f);
            for (std::uint32_t r : rows)
                if (data.at(r, f) != first) {
                    splittable.push_back(f);
                    break;
                }
        }
        if (!splittable.empty()) {
            int f = splittable[ctx.rng->next_below(splittable.size())];
            best = best_threshold(data, rows, f, node->gini_value);
        }
    }
    if (!best.found)
        return node;

    std::vector<std::uint32_t> left_rows, right_rows;
    for (std::uint32_t r : rows)
        (data.at(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    node->feature = best.feature;
    node->threshold = best.threshold;
    node->left = grow(ctx, left_rows, depth + 1);
    node->right = grow(ctx, right_rows, depth + 1);
    return node;
}

} // namespace

std::unique_ptr<TreeNode> train_cart(const Dataset& data, const CartParams& params) {
    if (data.rows == 0)
        throw EmptyDataset("cannot train on an empty dataset");
    Rng rng(derive_seed(params.seed, {0xca27}));
    GrowContext ctx{&data, &params, &rng, nullptr, 0};
    std::vector<std::uint32_t> rows(data.rows);
    std::iota(rows.begin(), rows.end(), 0);
    return grow(ctx, rows, 0);
}

int tree_predict(const TreeNode& root, std::span<const double> x) {
    const TreeNode* n = &root;
    while (!n->is_leaf())
        n = x[n->feature] <= n->threshold ? n->left.get() : n->right.get();
    return n->predicted_class;
}

std::array<double, 2> tree_predict_proba(const TreeNode& root, std::span<const double> x) {
    const TreeNode* n = &root;
    while (!n->is_leaf())
        n = x[n->feature] <= n->threshold ? n->left.get() : n->right.get();
    double total = static_cast<double>(n->class_counts[0] + n->class_counts[1]);
    return {static_cast<double>(n->class_counts[0]) / total,
            static_cast<double>(n->class_counts[1]) / total};
}

ClassifierModel train_cart_model(const Dataset& data, const CartParams& params) {
    CartModel m;
    m.root = train_cart(data, params);
    m.n_features = data.cols;
    return m;
}

ClassifierModel train_random_forest(const Dataset& data, const ForestParams& params) {
    if (data.rows == 0)
        throw EmptyDataset("cannot train on an empty dataset");
    if (params.n_trees < 1)
        throw Error("forest needs at least one tree");

    std::size_t mtry = params.features_per_split
                           ? *params.features_per_split
                           : static_cast<std::size_t>(std::sqrt(static_cast<double>(data.cols)));
    if (mtry < 1)
        mtry = 1;

    ForestModel model;
    model.n_features = data.cols;
    CartParams tree_params;
    tree_params.max_depth = params.max_depth;
    tree_params.splitter = Splitter::Best;
    tree_params.min_samples_split = 2;

    for (std::size_t t = 0; t < params.n_trees; ++t) {
        Rng rng(derive_seed(params.seed, {0xf0e, t}));
        std::vector<std::uint32_t> rows(data.rows);
        if (params.bootstrap) {
            for (auto& r : rows)
                r = static_cast<std::uint32_t>(rng.next_below(data.rows));
            std::sort(rows.begin(), rows.end());
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        GrowContext ctx{&data, &tree_params, &rng, nullptr,
                        mtry < data.cols ? mtry : 0};
        model.trees.push_back(grow(ctx, rows, 0));
    }
    return model;
}

namespace {

struct RegSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0; // sum of child (sum^2 / n), larger is better
};

std::unique_ptr<RegNode> grow_reg(const Dataset& data, const std::vector<double>& grad,
                                  const std::vector<double>& hess,
                                  std::vector<std::uint32_t>& rows, std::size_t depth,
                                  std::size_t max_depth) {
    auto node = std::make_unique<RegNode>();

    double g = 0.0, h = 0.0;
    for (std::uint32_t r : rows) {
        g += grad[r];
        h += hess[r];
    }
    // One Newton step per leaf; the epsilon keeps pure leaves finite.
    node->value = g / (h + 1e-12);
    node->value = std::clamp(node->value, -10.0, 10.0);

    if (depth >= max_depth || rows.size() < 2)
        return node;

    RegSplit best;
    std::vector<std::pair<double, std::uint32_t>> vals(rows.size());
    for (int f = 0; f < static_cast<int>(data.cols); ++f) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            vals[i] = {data.at(rows[i], f), rows[i]};
        std::sort(vals.begin(), vals.end());
        double left_sum = 0.0;
        std::size_t nl = 0;
        double total = 0.0;
        for (std::uint32_t r : rows)
            total += grad[r];
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            left_sum += grad[vals[i].second];
            ++nl;
            if (vals[i].first == vals[i + 1].first)
                continue;
            std::size_t nr = rows.size() - nl;
            double score = left_sum * left_sum / static_cast<double>(nl) +
                           (total - left_sum) * (total - left_sum) / static_cast<double>(nr);
            if (!best.found || score > best.score) {
                best.found = true;
                best.feature = f;
                best.threshold = (vals[i].first + vals[i + 1].first) / 2.0;
                best.score = score;
            }
        }
    }
    if (!best.found)
        return node;

    std::vector<std::uint32_t> left_rows, right_rows;
    for (std::uint32_t r : rows)
        (data.at(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    node->feature = best.feature;
    node->threshold = best.threshold;
    node->left = grow_reg(data, grad, hess, left_rows, depth + 1, max_depth);
    node->right = grow_reg(data, grad, hess, right_rows, depth + 1, max_depth);
    return node;
}

double reg_predict(const RegNode& root, const double* x) {
    const RegNode* n = &root;
    while (n->feature >= 0)
        n = x[n->feature] <= n->threshold ? n->left.get() : n->right.get();
    return n->value;
}

double mean_logistic_loss(const Dataset& data, const std::vector<double>& margin) {
    double loss = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        double z = margin[r];
        // log(1 + exp(-z*y')) with y' in {-1, +1}, numerically stable
        double signed_z = data.y[r] ? z : -z;
        loss += signed_z >= 0 ? std::log1p(std::exp(-signed_z))
                              : -signed_z + std::log1p(std::exp(signed_z));
    }
    return loss / static_cast<double>(data.rows);
}

} // namespace

ClassifierModel train_gradient_boosting(const Dataset& data, const GradBoostParams& params) {
    if (data.rows == 0)
        throw EmptyDataset("cannot train on an empty dataset");
    auto counts = data.class_counts();
    if (counts[0] == 0 || counts[1] == 0)
        throw SingleClassDataset("gradient boosting needs both classes");

    GradBoostModel model;
    model.n_features = data.cols;
    model.learning_rate = params.learning_rate;

    double p1 = static_cast<double>(counts[1]) / static_cast<double>(data.rows);
    model.base_score = std::log(p1 / (1.0 - p1));

    std::vector<double> margin(data.rows, model.base_score);
    model.stage_train_loss.push_back(mean_logistic_loss(data, margin));

    std::vector<double> grad(data.rows), hess(data.rows);
    for (std::size_t s = 0; s < params.n_stages; ++s) {
        for (std::size_t r = 0; r < data.rows; ++r) {
            double p = sigmoid(margin[r]);
            grad[r] = static_cast<double>(data.y[r]) - p; // negative gradient
            hess[r] = std::max(p * (1.0 - p), 1e-12);
        }
        std::vector<std::uint32_t> rows(data.rows);
        std::iota(rows.begin(), rows.end(), 0);
        auto tree = grow_reg(data, grad, hess, rows, 0, params.max_depth);
        for (std::size_t r = 0; r < data.rows; ++r)
            margin[r] += params.learning_rate * reg_predict(*tree, data.row(r));
        model.stages.push_back(std::move(tree));
        model.stage_train_loss.push_back(mean_logistic_loss(data, margin));
    }
    return model;
}

double gradboost_margin(const GradBoostModel& m, std::span<const double> x) {
    double z = m.base_score;
    for (const auto& stage : m.stages)
        z += m.learning_rate * reg_predict(*stage, x.data());
    return z;
}

} // namespace covsel
