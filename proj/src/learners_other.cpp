#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "covsel/learners.hpp"
#include "covsel/rng.hpp"
#include "covsel/text_util.hpp"

namespace covsel {

namespace {

void require_both_classes(const Dataset& data, const char* who) {
    if (data.rows == 0)
        throw EmptyDataset(std::string(who) + ": empty dataset");
    auto c = data.class_counts();
    if (c[0] == 0 || c[1] == 0)
        throw SingleClassDataset(std::string(who) + ": needs examples of both classes");
}

} // namespace

// --- logistic regression ----------------------------------------------------

double logreg_loss(const LogRegModel& m, const Dataset& data, double l2) {
    double loss = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        double z = m.bias;
        for (std::size_t c = 0; c < data.cols; ++c)
            z += m.weights[c] * data.at(r, c);
        double signed_z = data.y[r] ? z : -z;
        loss += signed_z >= 0 ? std::log1p(std::exp(-signed_z))
                              : -signed_z + std::log1p(std::exp(signed_z));
    }
    loss /= static_cast<double>(data.rows);
    double reg = 0.0;
    for (double w : m.weights)
        reg += w * w;
    return loss + 0.5 * l2 * reg;
}

void logreg_gradient(const LogRegModel& m, const Dataset& data, double l2,
                     std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(data.cols, 0.0);
    grad_b = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        double z = m.bias;
        for (std::size_t c = 0; c < data.cols; ++c)
            z += m.weights[c] * data.at(r, c);
        double err = sigmoid(z) - static_cast<double>(data.y[r]);
        for (std::size_t c = 0; c < data.cols; ++c)
            grad_w[c] += err * data.at(r, c);
        grad_b += err;
    }
    double inv_n = 1.0 / static_cast<double>(data.rows);
    for (std::size_t c = 0; c < data.cols; ++c)
        grad_w[c] = grad_w[c] * inv_n + l2 * m.weights[c];
    grad_b *= inv_n;
}

ClassifierModel train_logistic_regression(const Dataset& data, const LogRegParams& params) {
    require_both_classes(data, "logistic regression");
    LogRegModel m;
    m.weights.assign(data.cols, 0.0);
    m.bias = 0.0;
    std::vector<double> grad_w;
    double grad_b;
    for (std::size_t e = 0; e < params.epochs; ++e) {
        logreg_gradient(m, data, params.l2, grad_w, grad_b);
        for (std::size_t c = 0; c < data.cols; ++c)
            m.weights[c] -= params.step_size * grad_w[c];
        m.bias -= params.step_size * grad_b;
    }
    return m;
}

// --- categorical naive Bayes -----------------------------------------------

ClassifierModel train_naive_bayes(const Dataset& data, const NaiveBayesParams& params) {
    require_both_classes(data, "naive bayes");
    NaiveBayesModel m;
    m.alpha = params.laplace_alpha;
    m.class_totals = data.class_counts();

    m.cardinalities.assign(data.cols, 2);
    if (!data.column_cardinalities.empty()) {
        m.cardinalities = data.column_cardinalities;
    } else {
        for (std::size_t c = 0; c < data.cols; ++c) {
            std::uint16_t hi = 2;
            for (std::size_t r = 0; r < data.rows; ++r)
                hi = std::max<std::uint16_t>(hi, static_cast<std::uint16_t>(data.at(r, c)) + 1);
            m.cardinalities[c] = hi;
        }
    }

    m.counts.resize(data.cols);
    for (std::size_t c = 0; c < data.cols; ++c)
        m.counts[c].assign(m.cardinalities[c], {0, 0});
    for (std::size_t r = 0; r < data.rows; ++r)
        for (std::size_t c = 0; c < data.cols; ++c) {
            auto v = static_cast<std::size_t>(data.at(r, c));
            if (v < m.counts[c].size())
                ++m.counts[c][v][data.y[r]];
        }
    return m;
}

namespace {

std::array<double, 2> nb_posterior(const NaiveBayesModel& m, std::span<const double> x) {
    std::array<double, 2> logp;
    double total = static_cast<double>(m.class_totals[0] + m.class_totals[1]);
    for (int cls = 0; cls < 2; ++cls) {
        double lp = std::log(static_cast<double>(m.class_totals[cls]) / total);
        for (std::size_t f = 0; f < m.counts.size(); ++f) {
            auto v = static_cast<std::size_t>(x[f]);
            double num = m.alpha;
            if (v < m.counts[f].size())
                num += static_cast<double>(m.counts[f][v][cls]);
            double den = static_cast<double>(m.class_totals[cls]) +
                         m.alpha * static_cast<double>(m.cardinalities[f]);
            lp += std::log(num / den);
        }
        logp[cls] = lp;
    }
    double hi = std::max(logp[0], logp[1]);
    double e0 = std::exp(logp[0] - hi), e1 = std::exp(logp[1] - hi);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

} // namespace

// --- five-layer perceptron ---------------------------------------------------

namespace {

struct MlpActivations {
    // pre[i], post[i]: layer i outputs before/after activation
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

double mlp_forward(const MlpModel& m, const double* x, MlpActivations* acts) {
    std::vector<double> cur(x, x + m.dims[0]);
    for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
        std::size_t in_dim = m.dims[layer], out_dim = m.dims[layer + 1];
        std::vector<double> next(out_dim);
        for (std::size_t o = 0; o < out_dim; ++o) {
            double z = m.biases[layer][o];
            const double* w = m.weights[layer].data() + o * in_dim;
            for (std::size_t i = 0; i < in_dim; ++i)
                z += w[i] * cur[i];
            next[o] = z;
        }
        if (acts)
            acts->pre.push_back(next);
        bool last = layer + 1 == m.weights.size();
        if (!last)
            for (double& v : next)
                v = std::max(0.0, v); // rectifier
        if (acts)
            acts->post.push_back(next);
        cur = std::move(next);
    }
    return sigmoid(cur[0]);
}

// Accumulates gradients for one example into grad_w/grad_b.
void mlp_backprop(const MlpModel& m, const double* x, int label, double scale,
                  std::vector<std::vector<double>>& grad_w, std::vector<std::vector<double>>& grad_b) {
    MlpActivations acts;
    double p = mlp_forward(m, x, &acts);
    std::size_t layers = m.weights.size();

    // dL/dz for the output unit under logistic loss
    std::vector<double> delta{(p - static_cast<double>(label)) * scale};
    for (std::size_t layer = layers; layer-- > 0;) {
        std::size_t in_dim = m.dims[layer], out_dim = m.dims[layer + 1];
        const double* in_vals = layer == 0 ? x : acts.post[layer - 1].data();
        for (std::size_t o = 0; o < out_dim; ++o) {
            grad_b[layer][o] += delta[o];
            double* gw = grad_w[layer].data() + o * in_dim;
            for (std::size_t i = 0; i < in_dim; ++i)
                gw[i] += delta[o] * in_vals[i];
        }
        if (layer == 0)
            break;
        std::vector<double> prev_delta(in_dim, 0.0);
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double* w = m.weights[layer].data() + o * in_dim;
            for (std::size_t i = 0; i < in_dim; ++i)
                prev_delta[i] += delta[o] * w[i];
        }
        for (std::size_t i = 0; i < in_dim; ++i)
            if (acts.pre[layer - 1][i] <= 0.0)
                prev_delta[i] = 0.0;
        delta = std::move(prev_delta);
    }
}

} // namespace

double mlp_loss(const MlpModel& m, const Dataset& data) {
    double loss = 0.0;
    for (std::size_t r = 0; r < data.rows; ++r) {
        double p = mlp_forward(m, data.row(r), nullptr);
        p = std::clamp(p, 1e-15, 1.0 - 1e-15);
        loss += data.y[r] ? -std::log(p) : -std::log(1.0 - p);
    }
    return loss / static_cast<double>(data.rows);
}

void mlp_gradients(const MlpModel& m, const Dataset& data, std::vector<std::vector<double>>& grad_w,
                   std::vector<std::vector<double>>& grad_b) {
    grad_w.clear();
    grad_b.clear();
    for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
        grad_w.emplace_back(m.weights[layer].size(), 0.0);
        grad_b.emplace_back(m.biases[layer].size(), 0.0);
    }
    double scale = 1.0 / static_cast<double>(data.rows);
    for (std::size_t r = 0; r < data.rows; ++r)
        mlp_backprop(m, data.row(r), data.y[r], scale, grad_w, grad_b);
}

ClassifierModel train_mlp(const Dataset& data, const MlpParams& params) {
    require_both_classes(data, "mlp");

    MlpModel m;
    m.dims = {data.cols, params.hidden[0], params.hidden[1], params.hidden[2], 1};
    Rng rng(derive_seed(params.seed, {0x317}));
    for (std::size_t layer = 0; layer + 1 < m.dims.size(); ++layer) {
        std::size_t in_dim = m.dims[layer], out_dim = m.dims[layer + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
        std::vector<double> w(in_dim * out_dim);
        for (double& v : w)
            v = (rng.next_double() * 2.0 - 1.0) * bound;
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(out_dim, 0.0);
    }

    std::vector<std::uint32_t> order(data.rows);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<double>> grad_w, grad_b;

    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < data.rows; start += params.batch_size) {
            std::size_t end = std::min(start + params.batch_size, data.rows);
            grad_w.clear();
            grad_b.clear();
            for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
                grad_w.emplace_back(m.weights[layer].size(), 0.0);
                grad_b.emplace_back(m.biases[layer].size(), 0.0);
            }
            double scale = 1.0 / static_cast<double>(end - start);
            for (std::size_t i = start; i < end; ++i)
                mlp_backprop(m, data.row(order[i]), data.y[order[i]], scale, grad_w, grad_b);
            for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
                for (std::size_t j = 0; j < m.weights[layer].size(); ++j)
                    m.weights[layer][j] -= params.step_size * grad_w[layer][j];
                for (std::size_t j = 0; j < m.biases[layer].size(); ++j)
                    m.biases[layer][j] -= params.step_size * grad_b[layer][j];
            }
        }
    }
    return m;
}

// --- dummy -------------------------------------------------------------------

double DummyModel::draw_at(std::uint64_t k) const {
    return (mix64(derive_seed(seed, {0xd0, k})) >> 63) ? 1.0 : 0.0;
}

ClassifierModel train_dummy(const Dataset& data, std::uint64_t seed) {
    DummyModel m;
    m.seed = seed;
    m.n_features = data.cols;
    return m;
}

// --- common surface ---------------------------------------------------------

std::size_t model_arity(const ClassifierModel& model) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DummyModel>)
                return m.n_features;
            else if constexpr (std::is_same_v<T, CartModel>)
                return m.n_features;
            else if constexpr (std::is_same_v<T, ForestModel>)
                return m.n_features;
            else if constexpr (std::is_same_v<T, GradBoostModel>)
                return m.n_features;
            else if constexpr (std::is_same_v<T, LogRegModel>)
                return m.weights.size();
            else if constexpr (std::is_same_v<T, NaiveBayesModel>)
                return m.counts.size();
            else
                return m.dims[0];
        },
        model);
}

std::array<double, 2> predict_proba(const ClassifierModel& model, std::span<const double> x) {
    if (x.size() != model_arity(model))
        throw ArityMismatch("input has " + std::to_string(x.size()) + " features, model expects " +
                            std::to_string(model_arity(model)));

    return std::visit(
        [&](const auto& m) -> std::array<double, 2> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DummyModel>) {
                double p1 = m.draw_at(m.counter++);
                return {1.0 - p1, p1};
            } else if constexpr (std::is_same_v<T, CartModel>) {
                return tree_predict_proba(*m.root, x);
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                double p0 = 0.0, p1 = 0.0;
                for (const auto& t : m.trees) {
                    auto p = tree_predict_proba(*t, x);
                    p0 += p[0];
                    p1 += p[1];
                }
                double n = static_cast<double>(m.trees.size());
                return {p0 / n, p1 / n};
            } else if constexpr (std::is_same_v<T, GradBoostModel>) {
                double p1 = sigmoid(gradboost_margin(m, x));
                return {1.0 - p1, p1};
            } else if constexpr (std::is_same_v<T, LogRegModel>) {
                double z = m.bias;
                for (std::size_t c = 0; c < m.weights.size(); ++c)
                    z += m.weights[c] * x[c];
                double p1 = sigmoid(z);
                return {1.0 - p1, p1};
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                return nb_posterior(m, x);
            } else {
                double p1 = mlp_forward(m, x.data(), nullptr);
                return {1.0 - p1, p1};
            }
        },
        model);
}

// --- text rendering ----------------------------------------------------------

namespace {

void tree_to_text(const TreeNode& n, std::ostringstream& out, int indent) {
    for (int i = 0; i < indent; ++i)
        out << "  ";
    if (n.is_leaf())
        out << "leaf";
    else
        out << "node f" << n.feature << " <= " << format_double(n.threshold);
    out << " gini=" << format_double(n.gini_value) << " n=" << n.n_samples << " counts=["
        << n.class_counts[0] << "," << n.class_counts[1] << "] class=" << n.predicted_class << '\n';
    if (!n.is_leaf()) {
        tree_to_text(*n.left, out, indent + 1);
        tree_to_text(*n.right, out, indent + 1);
    }
}

void reg_to_text(const RegNode& n, std::ostringstream& out, int indent) {
    for (int i = 0; i < indent; ++i)
        out << "  ";
    if (n.feature < 0) {
        out << "leaf value=" << format_double(n.value) << '\n';
        return;
    }
    out << "node f" << n.feature << " <= " << format_double(n.threshold) << '\n';
    reg_to_text(*n.left, out, indent + 1);
    reg_to_text(*n.right, out, indent + 1);
}

void flat_array(std::ostringstream& out, const char* label, const std::vector<double>& v) {
    out << label;
    for (double d : v)
        out << ' ' << format_double(d);
    out << '\n';
}

} // namespace

std::string model_to_text(const ClassifierModel& model) {
    std::ostringstream out;
    out << header_line("model");
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DummyModel>) {
                out << "kind dummy seed=" << m.seed << '\n';
            } else if constexpr (std::is_same_v<T, CartModel>) {
                out << "kind cart\n";
                tree_to_text(*m.root, out, 0);
            } else if constexpr (std::is_same_v<T, ForestModel>) {
                out << "kind forest trees=" << m.trees.size() << '\n';
                for (std::size_t t = 0; t < m.trees.size(); ++t) {
                    out << "tree " << t << '\n';
                    tree_to_text(*m.trees[t], out, 0);
                }
            } else if constexpr (std::is_same_v<T, GradBoostModel>) {
                out << "kind gradboost stages=" << m.stages.size()
                    << " lr=" << format_double(m.learning_rate)
                    << " base=" << format_double(m.base_score) << '\n';
                for (std::size_t s = 0; s < m.stages.size(); ++s) {
                    out << "stage " << s << '\n';
                    reg_to_text(*m.stages[s], out, 0);
                }
            } else if constexpr (std::is_same_v<T, LogRegModel>) {
                out << "kind logreg bias=" << format_double(m.bias) << '\n';
                flat_array(out, "weights", m.weights);
            } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
                out << "kind naivebayes alpha=" << format_double(m.alpha) << " class_totals=["
                    << m.class_totals[0] << "," << m.class_totals[1] << "]\n";
                for (std::size_t f = 0; f < m.counts.size(); ++f) {
                    out << "feature " << f << " card=" << m.cardinalities[f];
                    for (const auto& vc : m.counts[f])
                        out << ' ' << vc[0] << ':' << vc[1];
                    out << '\n';
                }
            } else {
                out << "kind mlp dims=";
                for (std::size_t i = 0; i < m.dims.size(); ++i)
                    out << (i ? "," : "") << m.dims[i];
                out << '\n';
                for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
                    out << "layer " << layer << '\n';
                    flat_array(out, "w", m.weights[layer]);
                    flat_array(out, "b", m.biases[layer]);
                }
            }
        },
        model);
    return out.str();
}

} // namespace covsel
