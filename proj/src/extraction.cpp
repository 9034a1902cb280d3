#include "covsel/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "covsel/rng.hpp"
#include "covsel/text_util.hpp"

namespace covsel {

std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
label_tests(const HitDatabase& db, std::uint32_t group_id) {
    if (group_id >= db.model().group_count())
        throw UnknownGroup("group " + std::to_string(group_id) + " does not exist");
    std::vector<std::uint32_t> positives, negatives;
    const auto& order = db.simulated();
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        auto groups = db.groups_of_position(pos);
        bool hit = std::binary_search(groups.begin(), groups.end(), group_id);
        (hit ? positives : negatives).push_back(order[pos]);
    }
    return {std::move(positives), std::move(negatives)};
}

std::vector<std::uint16_t> encoded_cardinalities(const DutProfile& profile) {
    std::vector<std::uint16_t> cards;
    cards.reserve(profile.field_count());
    for (const auto& f : profile.fields())
        cards.push_back(f.encoded_cardinality());
    return cards;
}

GroupTrainingSet build_training_set(std::uint32_t group_id,
                                    const std::vector<std::uint32_t>& positives,
                                    const std::vector<std::uint32_t>& negatives,
                                    const EncodedMatrix& encoded_by_test,
                                    const std::vector<std::uint16_t>& column_cardinalities,
                                    std::size_t min_support, std::uint64_t seed) {
    if (positives.size() < min_support)
        throw InsufficientSupport("group " + std::to_string(group_id) + " exercised by " +
                                  std::to_string(positives.size()) + " tests, need " +
                                  std::to_string(min_support));
    if (negatives.empty())
        throw InsufficientSupport("group " + std::to_string(group_id) +
                                  " has no non-exercising tests to sample references from");

    std::size_t per_class = std::min(positives.size(), negatives.size());
    Rng rng(derive_seed(seed, {0x5a9, group_id}));

    GroupTrainingSet out;
    out.group_id = group_id;

    out.negative_ids.reserve(per_class);
    for (std::size_t i : rng.sample_without_replacement(negatives.size(), per_class))
        out.negative_ids.push_back(negatives[i]);

    if (positives.size() == per_class) {
        out.positive_ids = positives;
    } else {
        out.positive_ids.reserve(per_class);
        for (std::size_t i : rng.sample_without_replacement(positives.size(), per_class))
            out.positive_ids.push_back(positives[i]);
    }

    std::vector<std::pair<std::uint32_t, int>> rows;
    rows.reserve(2 * per_class);
    for (std::uint32_t id : out.positive_ids)
        rows.emplace_back(id, 1);
    for (std::uint32_t id : out.negative_ids)
        rows.emplace_back(id, 0);
    rng.shuffle(rows);

    Dataset& d = out.dataset;
    d.cols = encoded_by_test.cols;
    d.column_cardinalities = column_cardinalities;
    d.x.reserve(rows.size() * d.cols);
    for (auto [id, label] : rows) {
        const std::uint16_t* src = encoded_by_test.row(id);
        for (std::size_t c = 0; c < d.cols; ++c)
            d.x.push_back(static_cast<double>(src[c]));
        d.y.push_back(label);
        ++d.rows;
    }
    return out;
}

namespace {

void collect_clauses(const TreeNode& node, std::vector<ConstraintAtom>& path,
                     std::vector<ConstraintClause>& out) {
    if (node.is_leaf()) {
        if (node.predicted_class != 1)
            return;
        // Merge per feature: tightest upper bound per <=, tightest lower
        // bound per >.
        ConstraintClause clause;
        for (const auto& atom : path) {
            bool merged = false;
            for (auto& have : clause.atoms)
                if (have.feature == atom.feature && have.cmp == atom.cmp) {
                    if (atom.cmp == Cmp::Le)
                        have.threshold = std::min(have.threshold, atom.threshold);
                    else
                        have.threshold = std::max(have.threshold, atom.threshold);
                    merged = true;
                    break;
                }
            if (!merged)
                clause.atoms.push_back(atom);
        }
        std::sort(clause.atoms.begin(), clause.atoms.end(), [](const auto& a, const auto& b) {
            if (a.feature != b.feature)
                return a.feature < b.feature;
            return a.cmp == Cmp::Gt && b.cmp == Cmp::Le;
        });
        double total = static_cast<double>(node.class_counts[0] + node.class_counts[1]);
        clause.probability = static_cast<double>(node.class_counts[1]) / total;
        out.push_back(std::move(clause));
        return;
    }
    path.push_back({node.feature, Cmp::Le, node.threshold});
    collect_clauses(*node.left, path, out);
    path.back().cmp = Cmp::Gt;
    collect_clauses(*node.right, path, out);
    path.pop_back();
}

} // namespace

ExtractedConstraint extract_constraints(const TreeNode& tree, const DutProfile& profile,
                                        std::uint32_t group_id) {
    (void)profile;
    ExtractedConstraint out;
    out.group_id = group_id;
    std::vector<ConstraintAtom> path;
    collect_clauses(tree, path, out.clauses);
    if (out.clauses.empty())
        throw NoPositiveLeaves("tree predicts the positive class nowhere");
    return out;
}

bool clause_satisfied(const ConstraintClause& clause, std::span<const double> x) {
    for (const auto& a : clause.atoms) {
        double v = x[a.feature];
        if (a.cmp == Cmp::Le ? !(v <= a.threshold) : !(v > a.threshold))
            return false;
    }
    return true;
}

bool any_clause_satisfied(const ExtractedConstraint& c, std::span<const double> x) {
    for (const auto& clause : c.clauses)
        if (clause_satisfied(clause, x))
            return true;
    return false;
}

std::string render_clause_encoded(const ConstraintClause& clause, const DutProfile& profile) {
    if (clause.atoms.empty())
        return "(always)";
    std::ostringstream out;
    for (std::size_t i = 0; i < clause.atoms.size(); ++i) {
        const auto& a = clause.atoms[i];
        if (i)
            out << " and ";
        out << profile.fields()[a.feature].name << (a.cmp == Cmp::Le ? " <= " : " > ")
            << format_double(a.threshold);
    }
    return out.str();
}

std::string render_clause_decoded(const ConstraintClause& clause, const DutProfile& profile) {
    if (clause.atoms.empty())
        return "(always)";
    std::ostringstream out;
    bool first = true;
    for (const auto& a : clause.atoms) {
        const auto& f = profile.fields()[a.feature];
        if (!first)
            out << " and ";
        first = false;

        if (f.kind == FieldKind::Wide32) {
            // Encoded unit is the power-of-two bucket: translate the bucket
            // bound back into a raw value bound.
            if (a.cmp == Cmp::Le) {
                auto hi_bucket = static_cast<std::uint16_t>(std::floor(a.threshold));
                out << f.name << " <= " << bucket_range(hi_bucket).second;
            } else {
                auto lo_bucket = static_cast<std::uint16_t>(std::floor(a.threshold)) + 1;
                out << f.name << " >= " << bucket_range(static_cast<std::uint16_t>(lo_bucket)).first;
            }
            continue;
        }

        std::uint16_t card = f.encoded_cardinality();
        std::vector<std::uint16_t> allowed;
        for (std::uint16_t v = 0; v < card; ++v)
            if (a.cmp == Cmp::Le ? v <= a.threshold : v > a.threshold)
                allowed.push_back(v);
        out << f.name;
        if (allowed.size() == 1) {
            out << '=';
        } else {
            out << " in {";
        }
        for (std::size_t i = 0; i < allowed.size(); ++i) {
            if (i)
                out << ',';
            if (f.kind == FieldKind::Enum)
                out << f.values[allowed[i]];
            else
                out << allowed[i];
        }
        if (allowed.size() != 1)
            out << '}';
    }
    return out.str();
}

std::string constraint_report(const ExtractedConstraint& c, const DutProfile& profile) {
    std::ostringstream out;
    out << header_line("constraints");
    out << "group " << profile.model().groups()[c.group_id].name << '\n';
    for (const auto& clause : c.clauses) {
        out << "clause p=" << format_double(clause.probability) << ' '
            << render_clause_encoded(clause, profile) << "  ; decoded: "
            << render_clause_decoded(clause, profile) << '\n';
    }
    return out.str();
}

std::vector<double> score_feature_rows(const ClassifierModel& model, const double* rows,
                                       std::size_t n_rows, std::size_t cols, ExecMode mode) {
    if (cols != model_arity(model))
        throw ArityMismatch("candidate matrix has " + std::to_string(cols) +
                            " columns, model expects " + std::to_string(model_arity(model)));
    std::vector<double> scores(n_rows);

    // The dummy model draws from its own stream; reserving the whole block up
    // front keeps the draw sequence independent of scheduling.
    if (const auto* dummy = std::get_if<DummyModel>(&model)) {
        std::uint64_t base = dummy->counter;
        dummy->counter += n_rows;
        parallel_for(n_rows, mode, [&](std::size_t i) { scores[i] = dummy->draw_at(base + i); });
        return scores;
    }

    parallel_for(n_rows, mode, [&](std::size_t i) {
        scores[i] = predict_proba(model, std::span<const double>(rows + i * cols, cols))[1];
    });
    return scores;
}

std::vector<double> score_candidates(const ClassifierModel& model, const EncodedMatrix& encoded_by_test,
                                     std::span<const std::uint32_t> row_ids, ExecMode mode) {
    if (encoded_by_test.cols != model_arity(model))
        throw ArityMismatch("candidate matrix has " + std::to_string(encoded_by_test.cols) +
                            " columns, model expects " + std::to_string(model_arity(model)));
    std::size_t cols = encoded_by_test.cols;
    std::vector<double> converted(row_ids.size() * cols);
    parallel_for(row_ids.size(), mode, [&](std::size_t i) {
        const std::uint16_t* src = encoded_by_test.row(row_ids[i]);
        for (std::size_t c = 0; c < cols; ++c)
            converted[i * cols + c] = static_cast<double>(src[c]);
    });
    return score_feature_rows(model, converted.data(), row_ids.size(), cols, mode);
}

std::vector<double> score_candidates(const ClassifierModel& model, const EncodedMatrix& candidates,
                                     ExecMode mode) {
    std::vector<std::uint32_t> ids(candidates.rows);
    for (std::size_t i = 0; i < ids.size(); ++i)
        ids[i] = static_cast<std::uint32_t>(i);
    return score_candidates(model, candidates, ids, mode);
}

} // namespace covsel
