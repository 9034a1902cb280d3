#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "covsel/learners.hpp"
#include "covsel/rng.hpp"

using namespace covsel;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    Dataset d;
    for (std::size_t i = 0; i < rows.size(); ++i)
        d.add_row(rows[i], labels[i]);
    return d;
}

double training_accuracy(const TreeNode& tree, const Dataset& d) {
    std::size_t ok = 0;
    for (std::size_t r = 0; r < d.rows; ++r)
        ok += tree_predict(tree, std::span<const double>(d.row(r), d.cols)) == d.y[r];
    return static_cast<double>(ok) / static_cast<double>(d.rows);
}

double model_accuracy(const ClassifierModel& m, const Dataset& d) {
    std::size_t ok = 0;
    for (std::size_t r = 0; r < d.rows; ++r) {
        auto p = predict_proba(m, std::span<const double>(d.row(r), d.cols));
        ok += (p[1] > 0.5 ? 1 : 0) == d.y[r];
    }
    return static_cast<double>(ok) / static_cast<double>(d.rows);
}

// --- independent oracle: exhaustive search over depth <= 2 trees -----------
//
// Enumerates every (feature, midpoint threshold) split at the root and at
// both children, with leaves predicting subset majorities; returns the best
// achievable training accuracy. Shares nothing with the greedy trainer.

std::vector<double> midpoints(const Dataset& d, const std::vector<int>& rows, int feature) {
    std::vector<double> vals;
    for (int r : rows)
        vals.push_back(d.at(r, feature));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
        mids.push_back((vals[i] + vals[i + 1]) / 2.0);
    return mids;
}

std::size_t majority_correct(const Dataset& d, const std::vector<int>& rows) {
    std::size_t c0 = 0, c1 = 0;
    for (int r : rows)
        d.y[r] ? ++c1 : ++c0;
    return std::max(c0, c1);
}

// best correct count on `rows` with one more split allowed
std::size_t best_depth1(const Dataset& d, const std::vector<int>& rows) {
    std::size_t best = majority_correct(d, rows);
    for (int f = 0; f < static_cast<int>(d.cols); ++f)
        for (double t : midpoints(d, rows, f)) {
            std::vector<int> left, right;
            for (int r : rows)
                (d.at(r, f) <= t ? left : right).push_back(r);
            best = std::max(best, majority_correct(d, left) + majority_correct(d, right));
        }
    return best;
}

double brute_force_depth2_accuracy(const Dataset& d) {
    std::vector<int> all(d.rows);
    for (std::size_t i = 0; i < d.rows; ++i)
        all[i] = static_cast<int>(i);
    std::size_t best = majority_correct(d, all);
    for (int f = 0; f < static_cast<int>(d.cols); ++f)
        for (double t : midpoints(d, all, f)) {
            std::vector<int> left, right;
            for (int r : all)
                (d.at(r, f) <= t ? left : right).push_back(r);
            best = std::max(best, best_depth1(d, left) + best_depth1(d, right));
        }
    return static_cast<double>(best) / static_cast<double>(d.rows);
}

Dataset random_small_dataset(Rng& rng, std::size_t max_rows = 12, std::size_t max_cols = 3) {
    Dataset d;
    std::size_t rows = 4 + rng.next_below(max_rows - 3);
    std::size_t cols = 1 + rng.next_below(max_cols);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> row(cols);
        for (auto& v : row)
            v = static_cast<double>(rng.next_below(4));
        d.add_row(row, static_cast<int>(rng.next_below(2)));
    }
    return d;
}

} // namespace

TEST_CASE("gini unit values") {
    CHECK(gini(5, 5) == 0.5);
    CHECK(gini(10, 0) == 0.0);
    CHECK(gini(3, 1) == 0.375);
    CHECK_THROWS_AS(gini(0, 0), EmptyNode);
}

TEST_CASE("perfectly separable single feature yields a depth-1 tree") {
    Dataset d = make_dataset({{0}, {0}, {1}, {1}}, {0, 0, 1, 1});
    auto tree = train_cart(d, {});
    REQUIRE_FALSE(tree->is_leaf());
    CHECK(tree->feature == 0);
    CHECK(tree->threshold == 0.5);
    CHECK(tree->left->is_leaf());
    CHECK(tree->right->is_leaf());
    CHECK(training_accuracy(*tree, d) == 1.0);
}

TEST_CASE("pure labels produce a single leaf") {
    Dataset d = make_dataset({{0, 3}, {1, 2}, {2, 1}}, {1, 1, 1});
    auto tree = train_cart(d, {});
    CHECK(tree->is_leaf());
    CHECK(tree->predicted_class == 1);
    CHECK(tree->gini_value == 0.0);
}

TEST_CASE("empty dataset is rejected") {
    Dataset d;
    CHECK_THROWS_AS(train_cart(d, {}), EmptyDataset);
}

TEST_CASE("exhaustive depth-2 search bounds the greedy tree") {
    // Greedy split selection is myopic, so the exhaustive optimum is an
    // upper bound, tight on most ordinal datasets but not all of them.
    Rng rng(20240);
    int equal = 0;
    for (int i = 0; i < 200; ++i) {
        Dataset d = random_small_dataset(rng);
        CartParams params;
        params.max_depth = 2;
        auto tree = train_cart(d, params);
        CHECK(tree->depth() <= 2);
        double greedy = training_accuracy(*tree, d);
        double optimal = brute_force_depth2_accuracy(d);
        CHECK(greedy <= optimal + 1e-12);
        CHECK(optimal <= 1.0);
        equal += std::abs(greedy - optimal) < 1e-12;
    }
    CHECK(equal >= 140);
}

TEST_CASE("greedy depth-2 is optimal whenever a single split separates") {
    // With labels defined by one threshold rule, the separating split has
    // the strictly largest impurity decrease, so greedy must find it.
    Rng rng(3301);
    for (int i = 0; i < 100; ++i) {
        Dataset d;
        std::size_t rows = 4 + rng.next_below(9);
        std::size_t cols = 1 + rng.next_below(3);
        int fa = static_cast<int>(rng.next_below(cols));
        double ta = 0.5 + static_cast<double>(rng.next_below(3));
        bool one_of_each = false;
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row(cols);
            for (auto& v : row)
                v = static_cast<double>(rng.next_below(4));
            d.add_row(row, row[fa] <= ta ? 0 : 1);
        }
        auto counted = d.class_counts();
        one_of_each = counted[0] > 0 && counted[1] > 0;
        if (!one_of_each)
            continue;
        CartParams params;
        params.max_depth = 2;
        auto tree = train_cart(d, params);
        CHECK(training_accuracy(*tree, d) == 1.0);
        CHECK(training_accuracy(*tree, d) == brute_force_depth2_accuracy(d));
    }
}

TEST_CASE("zero-gain splits let the tree solve xor") {
    // every root split of xor has zero impurity decrease; splitting anyway
    // is what makes the two-level solution reachable
    Dataset d = make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
    CartParams params;
    params.max_depth = 2;
    auto tree = train_cart(d, params);
    CHECK(training_accuracy(*tree, d) == 1.0);
    CHECK(brute_force_depth2_accuracy(d) == 1.0);
}

TEST_CASE("leaf frequencies give the probability estimate") {
    // pure-positive leaf of 7 examples
    Dataset d = make_dataset({{0}, {0}, {0}, {0}, {0}, {0}, {0}}, {1, 1, 1, 1, 1, 1, 1});
    ClassifierModel m = train_cart_model(d, {});
    auto p = predict_proba(m, std::vector<double>{0.0});
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 1.0);
}

TEST_CASE("a pure-negative matching leaf predicts negative with certainty") {
    // label follows the first feature; an input routed to the negative side
    // gets class probability exactly (1, 0)
    Dataset d = make_dataset({{0, 3, 1, 9}, {0, 1, 0, 4}, {1, 3, 1, 9}, {1, 0, 1, 2}},
                             {0, 0, 1, 1});
    ClassifierModel m = train_cart_model(d, {});
    auto p = predict_proba(m, std::vector<double>{0.0, 3.0, 1.0, 9.0});
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);
}

TEST_CASE("forest averaging of two opposite pure trees") {
    auto leaf = [](std::uint64_t c0, std::uint64_t c1) {
        auto n = std::make_unique<TreeNode>();
        n->n_samples = c0 + c1;
        n->class_counts = {c0, c1};
        n->gini_value = 0.0;
        n->predicted_class = c1 > c0 ? 1 : 0;
        return n;
    };
    ForestModel f;
    f.n_features = 1;
    f.trees.push_back(leaf(1, 0));
    f.trees.push_back(leaf(0, 1));
    auto p = predict_proba(ClassifierModel(std::move(f)), std::vector<double>{0.0});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
}

TEST_CASE("degenerate forest equals the plain tree on 50 datasets") {
    Rng rng(88);
    for (int i = 0; i < 50; ++i) {
        Dataset d = random_small_dataset(rng, 20, 4);
        ClassifierModel cart = train_cart_model(d, {});
        ForestParams fp;
        fp.n_trees = 1;
        fp.bootstrap = false;
        fp.features_per_split = d.cols;
        fp.seed = i;
        ClassifierModel forest = train_random_forest(d, fp);
        for (std::size_t r = 0; r < d.rows; ++r) {
            std::span<const double> x(d.row(r), d.cols);
            CHECK(predict_proba(cart, x) == predict_proba(forest, x));
        }
    }
}

TEST_CASE("forest fits a separable toy set") {
    Rng rng(5);
    Dataset d;
    for (int i = 0; i < 60; ++i) {
        double a = static_cast<double>(rng.next_below(4));
        double b = static_cast<double>(rng.next_below(4));
        d.add_row(std::vector<double>{a, b}, a >= 2 ? 1 : 0);
    }
    ForestParams fp;
    fp.n_trees = 25;
    fp.seed = 3;
    ClassifierModel forest = train_random_forest(d, fp);
    CHECK(model_accuracy(forest, d) == 1.0);
}

TEST_CASE("forest training is reproducible") {
    Rng rng(6);
    Dataset d = random_small_dataset(rng, 30, 4);
    ForestParams fp;
    fp.n_trees = 11;
    fp.seed = 77;
    ClassifierModel a = train_random_forest(d, fp);
    ClassifierModel b = train_random_forest(d, fp);
    CHECK(model_to_text(a) == model_to_text(b));
}

TEST_CASE("boosting with zero stages returns the class prior") {
    Dataset d = make_dataset({{0}, {1}, {2}, {3}}, {0, 1, 1, 1});
    GradBoostParams gp;
    gp.n_stages = 0;
    ClassifierModel m = train_gradient_boosting(d, gp);
    auto p = predict_proba(m, std::vector<double>{9.0});
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("boosting fits xor") {
    Dataset d = make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
    GradBoostParams gp;
    gp.n_stages = 50;
    gp.learning_rate = 0.5;
    gp.max_depth = 2;
    ClassifierModel m = train_gradient_boosting(d, gp);
    CHECK(model_accuracy(m, d) == 1.0);
}

TEST_CASE("boosting training loss never increases") {
    Rng rng(404);
    for (int i = 0; i < 20; ++i) {
        Dataset d = random_small_dataset(rng, 24, 4);
        auto c = d.class_counts();
        if (c[0] == 0 || c[1] == 0)
            continue;
        GradBoostParams gp;
        gp.n_stages = 30;
        ClassifierModel m = train_gradient_boosting(d, gp);
        const auto& losses = std::get<GradBoostModel>(m).stage_train_loss;
        REQUIRE(losses.size() == 31);
        for (std::size_t s = 1; s < losses.size(); ++s)
            CHECK(losses[s] <= losses[s - 1] + 1e-12);
    }
}

TEST_CASE("single-class training sets are rejected across learners") {
    Dataset d = make_dataset({{0}, {1}}, {1, 1});
    CHECK_THROWS_AS(train_gradient_boosting(d, {}), SingleClassDataset);
    CHECK_THROWS_AS(train_logistic_regression(d, {}), SingleClassDataset);
    CHECK_THROWS_AS(train_naive_bayes(d, {}), SingleClassDataset);
    CHECK_THROWS_AS(train_mlp(d, {{4, 3, 2}, 1, 0.1, 2, 1}), SingleClassDataset);
}

TEST_CASE("zero-weight logistic model answers one half") {
    LogRegModel m;
    m.weights = {0.0, 0.0, 0.0};
    auto p = predict_proba(ClassifierModel(m), std::vector<double>{4.0, 1.0, 7.0});
    CHECK(p[1] == 0.5);
}

TEST_CASE("logistic gradient matches central finite differences") {
    Dataset d = make_dataset({{0, 2}, {1, 0}, {2, 3}, {3, 1}, {1, 2}}, {0, 0, 1, 1, 1});
    LogRegModel m;
    m.weights = {0.3, -0.2};
    m.bias = 0.1;
    const double l2 = 0.01, h = 1e-5;

    std::vector<double> grad_w;
    double grad_b;
    logreg_gradient(m, d, l2, grad_w, grad_b);

    for (std::size_t c = 0; c < 2; ++c) {
        LogRegModel up = m, down = m;
        up.weights[c] += h;
        down.weights[c] -= h;
        double fd = (logreg_loss(up, d, l2) - logreg_loss(down, d, l2)) / (2 * h);
        CHECK(std::abs(fd - grad_w[c]) / std::max(1e-8, std::abs(fd)) < 1e-4);
    }
    LogRegModel up = m, down = m;
    up.bias += h;
    down.bias -= h;
    double fd_b = (logreg_loss(up, d, l2) - logreg_loss(down, d, l2)) / (2 * h);
    CHECK(std::abs(fd_b - grad_b) / std::max(1e-8, std::abs(fd_b)) < 1e-4);
}

TEST_CASE("logistic regression separates a separable set") {
    Dataset d;
    Rng rng(31);
    for (int i = 0; i < 40; ++i) {
        double a = static_cast<double>(rng.next_below(4));
        d.add_row(std::vector<double>{a, static_cast<double>(rng.next_below(3))}, a >= 2 ? 1 : 0);
    }
    LogRegParams lp;
    lp.epochs = 500;
    lp.step_size = 0.5;
    lp.l2 = 0.0;
    ClassifierModel m = train_logistic_regression(d, lp);
    CHECK(model_accuracy(m, d) == 1.0);
}

TEST_CASE("categorical bayes hand example") {
    // class 1 saw value 1 three times, class 0 saw value 0 three times
    Dataset d = make_dataset({{1}, {1}, {1}, {0}, {0}, {0}}, {1, 1, 1, 0, 0, 0});
    ClassifierModel m = train_naive_bayes(d, {1.0});
    auto p = predict_proba(m, std::vector<double>{1.0});
    CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-9));
    auto q = predict_proba(m, std::vector<double>{0.0});
    CHECK(q[1] == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("label-independent feature gives an even posterior") {
    Dataset d = make_dataset({{0}, {1}, {0}, {1}}, {0, 0, 1, 1});
    ClassifierModel m = train_naive_bayes(d, {1.0});
    auto p = predict_proba(m, std::vector<double>{1.0});
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("smoothing keeps unseen values away from zero") {
    Dataset d = make_dataset({{1}, {1}, {0}, {0}}, {1, 1, 0, 0});
    ClassifierModel m = train_naive_bayes(d, {1.0});
    auto p = predict_proba(m, std::vector<double>{7.0}); // value never seen
    CHECK(p[0] > 0.0);
    CHECK(p[1] > 0.0);
}

TEST_CASE("mlp gradients match central finite differences") {
    Dataset d = make_dataset({{0.2, 1.0}, {1.5, 0.3}, {2.0, 2.0}, {0.1, 0.4}, {1.1, 1.9}},
                             {0, 1, 1, 0, 1});
    MlpParams mp;
    mp.hidden = {4, 3, 2};
    mp.epochs = 0;
    mp.seed = 12;
    MlpModel m = std::get<MlpModel>(train_mlp(d, mp));
    // Nudge the check point off the rectifier kinks: with all-zero biases a
    // fully dead layer parks pre-activations exactly at zero, where the
    // central difference straddles the corner.
    Rng jitter(7);
    for (auto& layer : m.biases)
        for (double& b : layer)
            b = jitter.next_double() * 0.2 - 0.1;

    std::vector<std::vector<double>> gw, gb;
    mlp_gradients(m, d, gw, gb);

    const double h = 1e-5;
    for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
        for (std::size_t j = 0; j < m.weights[layer].size(); ++j) {
            MlpModel up = m, down = m;
            up.weights[layer][j] += h;
            down.weights[layer][j] -= h;
            double fd = (mlp_loss(up, d) - mlp_loss(down, d)) / (2 * h);
            double denom = std::max({1e-6, std::abs(fd), std::abs(gw[layer][j])});
            CHECK(std::abs(fd - gw[layer][j]) / denom < 1e-3);
        }
        for (std::size_t j = 0; j < m.biases[layer].size(); ++j) {
            MlpModel up = m, down = m;
            up.biases[layer][j] += h;
            down.biases[layer][j] -= h;
            double fd = (mlp_loss(up, d) - mlp_loss(down, d)) / (2 * h);
            double denom = std::max({1e-6, std::abs(fd), std::abs(gb[layer][j])});
            CHECK(std::abs(fd - gb[layer][j]) / denom < 1e-3);
        }
    }
}

TEST_CASE("mlp learns xor for most seeds") {
    Dataset d = make_dataset({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
    int solved = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        MlpParams mp;
        mp.hidden = {8, 8, 8};
        mp.epochs = 2000;
        mp.step_size = 0.3;
        mp.batch_size = 4;
        mp.seed = seed;
        ClassifierModel m = train_mlp(d, mp);
        solved += model_accuracy(m, d) == 1.0;
    }
    CHECK(solved >= 4);
}

TEST_CASE("mlp training is reproducible") {
    Rng rng(2);
    Dataset d;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> row{static_cast<double>(rng.next_below(4)),
                                static_cast<double>(rng.next_below(4))};
        d.add_row(row, static_cast<int>(rng.next_below(2)));
    }
    MlpParams mp;
    mp.epochs = 5;
    mp.seed = 9;
    ClassifierModel a = train_mlp(d, mp);
    ClassifierModel b = train_mlp(d, mp);
    CHECK(model_to_text(a) == model_to_text(b));
}

TEST_CASE("dummy prediction frequency and reproducibility") {
    Dataset d = make_dataset({{0}, {1}}, {0, 1});
    ClassifierModel a = train_dummy(d, 1234);
    std::size_t ones = 0;
    std::vector<double> seq;
    for (int i = 0; i < 10000; ++i) {
        auto p = predict_proba(a, std::vector<double>{static_cast<double>(i % 3)});
        ones += p[1] == 1.0;
        if (i < 50)
            seq.push_back(p[1]);
    }
    double freq = static_cast<double>(ones) / 10000.0;
    CHECK(freq >= 0.47);
    CHECK(freq <= 0.53);

    // same seed, different inputs: identical draw sequence
    ClassifierModel b = train_dummy(d, 1234);
    for (int i = 0; i < 50; ++i)
        CHECK(predict_proba(b, std::vector<double>{9.0})[1] == seq[i]);
}

TEST_CASE("probabilities are a distribution for every model family") {
    Rng rng(64);
    Dataset d;
    for (int i = 0; i < 40; ++i) {
        std::vector<double> row{static_cast<double>(rng.next_below(4)),
                                static_cast<double>(rng.next_below(3)),
                                static_cast<double>(rng.next_below(5))};
        d.add_row(row, static_cast<int>(rng.next_below(2)));
    }
    std::vector<ClassifierModel> models;
    models.push_back(train_dummy(d, 5));
    models.push_back(train_cart_model(d, {}));
    models.push_back(train_random_forest(d, {5, std::nullopt, std::nullopt, true, 2}));
    models.push_back(train_gradient_boosting(d, {20, 0.1, 3, 0}));
    models.push_back(train_logistic_regression(d, {50, 0.1, 1e-4, 0}));
    models.push_back(train_naive_bayes(d, {1.0}));
    models.push_back(train_mlp(d, {{8, 4, 3}, 10, 0.05, 8, 4}));

    for (const auto& m : models)
        for (int i = 0; i < 30; ++i) {
            std::vector<double> x{static_cast<double>(rng.next_below(4)),
                                  static_cast<double>(rng.next_below(3)),
                                  static_cast<double>(rng.next_below(5))};
            auto p = predict_proba(m, x);
            CHECK(p[0] >= 0.0);
            CHECK(p[1] >= 0.0);
            CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-12);
        }
}

TEST_CASE("depth-limited trees never exceed depth 3") {
    Rng rng(91);
    for (int i = 0; i < 20; ++i) {
        Dataset d = random_small_dataset(rng, 40, 5);
        for (Splitter s : {Splitter::Best, Splitter::Random}) {
            CartParams cp;
            cp.max_depth = 3;
            cp.splitter = s;
            cp.seed = i;
            auto tree = train_cart(d, cp);
            CHECK(tree->depth() <= 3);
        }
    }
}

TEST_CASE("row replication preserves structure and predictions") {
    Rng rng(14);
    for (int i = 0; i < 10; ++i) {
        Dataset d = random_small_dataset(rng, 10, 3);
        Dataset tripled;
        for (int k = 0; k < 3; ++k)
            for (std::size_t r = 0; r < d.rows; ++r)
                tripled.add_row(std::span<const double>(d.row(r), d.cols), d.y[r]);

        auto a = train_cart(d, {});
        auto b = train_cart(tripled, {});

        std::function<void(const TreeNode&, const TreeNode&)> compare =
            [&](const TreeNode& x, const TreeNode& y) {
                CHECK(x.is_leaf() == y.is_leaf());
                CHECK(x.predicted_class == y.predicted_class);
                if (!x.is_leaf() && !y.is_leaf()) {
                    CHECK(x.feature == y.feature);
                    CHECK(x.threshold == y.threshold);
                    compare(*x.left, *y.left);
                    compare(*x.right, *y.right);
                }
            };
        compare(*a, *b);
        for (std::size_t r = 0; r < d.rows; ++r) {
            std::span<const double> x(d.row(r), d.cols);
            CHECK(tree_predict(*a, x) == tree_predict(*b, x));
        }
    }
}

TEST_CASE("split ties go to the lowest feature") {
    // feature 1 duplicates feature 0: identical gains everywhere
    Dataset d = make_dataset({{0, 0}, {0, 0}, {1, 1}, {1, 1}}, {0, 0, 1, 1});
    auto tree = train_cart(d, {});
    REQUIRE_FALSE(tree->is_leaf());
    CHECK(tree->feature == 0);
}

TEST_CASE("prediction arity is checked") {
    Dataset d = make_dataset({{0, 1}, {1, 0}}, {0, 1});
    ClassifierModel m = train_cart_model(d, {});
    CHECK_THROWS_AS(predict_proba(m, std::vector<double>{1.0}), ArityMismatch);
}

TEST_CASE("tree serialization golden file") {
    Dataset d = make_dataset({{0}, {0}, {1}, {1}}, {0, 0, 1, 1});
    ClassifierModel m = train_cart_model(d, {});
    std::string expected = "# covsel-model v1\n"
                           "kind cart\n"
                           "node f0 <= 0.5 gini=0.5 n=4 counts=[2,2] class=0\n"
                           "  leaf gini=0 n=2 counts=[2,0] class=0\n"
                           "  leaf gini=0 n=2 counts=[0,2] class=1\n";
    CHECK(model_to_text(m) == expected);
}
