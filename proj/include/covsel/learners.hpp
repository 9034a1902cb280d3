#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "covsel/errors.hpp"

namespace covsel {

// Binary-labelled feature matrix, row-major doubles.
struct Dataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> x;
    std::vector<int> y;
    // Optional per-column category counts; the categorical learner infers
    // them from the data when absent.
    std::vector<std::uint16_t> column_cardinalities;

    double at(std::size_t r, std::size_t c) const { return x[r * cols + c]; }
    const double* row(std::size_t r) const { return x.data() + r * cols; }
    void add_row(std::span<const double> values, int label) {
        if (cols == 0)
            cols = values.size();
        x.insert(x.end(), values.begin(), values.end());
        y.push_back(label);
        ++rows;
    }
    std::array<std::uint64_t, 2> class_counts() const {
        std::array<std::uint64_t, 2> c{0, 0};
        for (int label : y)
            ++c[label];
        return c;
    }
};

// 1 - sum((c_i/n)^2) over the two classes. Throws EmptyNode when both
// counts are zero.
double gini(std::uint64_t c0, std::uint64_t c1);

// Classification tree node. Leaves keep their class counts so that leaf
// frequencies can serve as probability estimates.
struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    double gini_value = 0.0;
    std::uint64_t n_samples = 0;
    std::array<std::uint64_t, 2> class_counts{0, 0};
    int predicted_class = 0;

    bool is_leaf() const { return feature < 0; }
    std::size_t depth() const {
        return is_leaf() ? 0 : 1 + std::max(left->depth(), right->depth());
    }
};

enum class Splitter { Best, Random };

struct CartParams {
    std::optional<std::size_t> max_depth; // nullopt = unlimited
    Splitter splitter = Splitter::Best;
    std::size_t min_samples_split = 2;
    std::uint64_t seed = 0; // only the random splitter draws from it
};

// Greedy recursive partitioning by Gini impurity decrease. Features are
// scanned in column order, thresholds at midpoints between consecutive
// distinct sorted values; ties keep the lowest feature then lowest
// threshold. Impure nodes split as long as any feature still has two
// distinct values.
std::unique_ptr<TreeNode> train_cart(const Dataset& data, const CartParams& params);

int tree_predict(const TreeNode& root, std::span<const double> x);
std::array<double, 2> tree_predict_proba(const TreeNode& root, std::span<const double> x);

struct CartModel {
    std::shared_ptr<const TreeNode> root;
    std::size_t n_features = 0;
};

struct ForestParams {
    std::size_t n_trees = 100;
    std::optional<std::size_t> max_depth;
    std::optional<std::size_t> features_per_split; // nullopt = floor(sqrt(d))
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

struct ForestModel {
    std::vector<std::shared_ptr<const TreeNode>> trees;
    std::size_t n_features = 0;
};

struct GradBoostParams {
    std::size_t n_stages = 100;
    double learning_rate = 0.1;
    std::size_t max_depth = 3;
    std::uint64_t seed = 0;
};

// Regression tree used for the boosting stages.
struct RegNode {
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<RegNode> left;
    std::unique_ptr<RegNode> right;
    double value = 0.0;
};

struct GradBoostModel {
    double base_score = 0.0; // prior log-odds
    double learning_rate = 0.1;
    std::vector<std::shared_ptr<const RegNode>> stages;
    std::vector<double> stage_train_loss; // loss after 0..n stages
    std::size_t n_features = 0;
};

struct LogRegParams {
    std::size_t epochs = 200;
    double step_size = 0.1;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
};

struct LogRegModel {
    std::vector<double> weights;
    double bias = 0.0;
};

struct NaiveBayesParams {
    double laplace_alpha = 1.0;
};

struct NaiveBayesModel {
    std::array<std::uint64_t, 2> class_totals{0, 0};
    // counts[feature][value][class]
    std::vector<std::vector<std::array<std::uint64_t, 2>>> counts;
    std::vector<std::uint16_t> cardinalities;
    double alpha = 1.0;
};

struct MlpParams {
    std::array<std::size_t, 3> hidden = {64, 32, 16};
    std::size_t epochs = 200;
    double step_size = 0.01;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
};

// Five layers in total: input, three rectified hidden layers, sigmoid output.
struct MlpModel {
    std::vector<std::vector<double>> weights; // [layer][out*in_dim + in]
    std::vector<std::vector<double>> biases;
    std::vector<std::size_t> dims; // input, h1, h2, h3, 1
};

// Feature-blind reference point: every probability query flips a fair coin
// from the model's own seeded stream.
struct DummyModel {
    std::uint64_t seed = 0;
    std::size_t n_features = 0;
    mutable std::uint64_t counter = 0;

    double draw_at(std::uint64_t k) const;
};

using ClassifierModel =
    std::variant<DummyModel, CartModel, ForestModel, GradBoostModel, LogRegModel, NaiveBayesModel, MlpModel>;

ClassifierModel train_dummy(const Dataset& data, std::uint64_t seed);
ClassifierModel train_cart_model(const Dataset& data, const CartParams& params);
ClassifierModel train_random_forest(const Dataset& data, const ForestParams& params);
ClassifierModel train_gradient_boosting(const Dataset& data, const GradBoostParams& params);
ClassifierModel train_logistic_regression(const Dataset& data, const LogRegParams& params);
ClassifierModel train_naive_bayes(const Dataset& data, const NaiveBayesParams& params);
ClassifierModel train_mlp(const Dataset& data, const MlpParams& params);

std::size_t model_arity(const ClassifierModel& model);
double gradboost_margin(const GradBoostModel& m, std::span<const double> x);

// (p0, p1), non-negative, summing to one.
std::array<double, 2> predict_proba(const ClassifierModel& model, std::span<const double> x);

// Loss/gradient surfaces exposed for finite-difference checks.
double logreg_loss(const LogRegModel& m, const Dataset& data, double l2);
void logreg_gradient(const LogRegModel& m, const Dataset& data, double l2,
                     std::vector<double>& grad_w, double& grad_b);
double mlp_loss(const MlpModel& m, const Dataset& data);
void mlp_gradients(const MlpModel& m, const Dataset& data, std::vector<std::vector<double>>& grad_w,
                   std::vector<std::vector<double>>& grad_b);

// Structured text rendering (trees preorder, parametric weights as flat
// arrays) for inspection and golden-file tests.
std::string model_to_text(const ClassifierModel& model);

inline double sigmoid(double z) {
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

} // namespace covsel
