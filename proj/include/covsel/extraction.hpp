#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "covsel/coverage_model.hpp"
#include "covsel/learners.hpp"
#include "covsel/parallel.hpp"
#include "covsel/stimulus.hpp"

namespace covsel {

// Balanced labelled matrix for one target coverage group. Positives are
// simulated tests that exercised the group, negatives an equal-size
// reference sample from those that did not.
struct GroupTrainingSet {
    std::uint32_t group_id = 0;
    Dataset dataset;
    std::vector<std::uint32_t> positive_ids;
    std::vector<std::uint32_t> negative_ids;
};

// Splits the simulated tests of db into (exercising, non-exercising) for
// one group, preserving simulation order.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>
label_tests(const HitDatabase& db, std::uint32_t group_id);

// Equal class counts at min(|positives|, |negatives|): the reference side is
// sampled without replacement; when negatives are scarcer the positives are
// down-sampled instead. Row order is shuffled. Throws InsufficientSupport
// when positives < min_support or no negative exists.
GroupTrainingSet build_training_set(std::uint32_t group_id,
                                    const std::vector<std::uint32_t>& positives,
                                    const std::vector<std::uint32_t>& negatives,
                                    const EncodedMatrix& encoded_by_test,
                                    const std::vector<std::uint16_t>& column_cardinalities,
                                    std::size_t min_support, std::uint64_t seed);

std::vector<std::uint16_t> encoded_cardinalities(const DutProfile& profile);

enum class Cmp { Le, Gt };

struct ConstraintAtom {
    int feature = 0;
    Cmp cmp = Cmp::Le;
    double threshold = 0.0; // encoded units
};

// One root-to-positive-leaf path, comparators merged per feature.
struct ConstraintClause {
    std::vector<ConstraintAtom> atoms; // empty = unconditional
    double probability = 0.0;          // leaf class-1 frequency
};

struct ExtractedConstraint {
    std::uint32_t group_id = 0;
    std::vector<ConstraintClause> clauses;
};

// Enumerates the tree's positive-leaf paths. Throws NoPositiveLeaves when
// the tree predicts class 1 nowhere.
ExtractedConstraint extract_constraints(const TreeNode& tree, const DutProfile& profile,
                                        std::uint32_t group_id);

bool clause_satisfied(const ConstraintClause& clause, std::span<const double> x);
bool any_clause_satisfied(const ExtractedConstraint& c, std::span<const double> x);

// "input_interface in {RDR} and data_bin >= 65536" style rendering of an
// encoded clause back into raw field values.
std::string render_clause_decoded(const ConstraintClause& clause, const DutProfile& profile);
std::string render_clause_encoded(const ConstraintClause& clause, const DutProfile& profile);
std::string constraint_report(const ExtractedConstraint& c, const DutProfile& profile);

// Class-1 probability per candidate row, output index-aligned with input.
std::vector<double> score_candidates(const ClassifierModel& model, const EncodedMatrix& candidates,
                                     ExecMode mode = ExecMode::Serial);
std::vector<double> score_candidates(const ClassifierModel& model, const EncodedMatrix& encoded_by_test,
                                     std::span<const std::uint32_t> row_ids,
                                     ExecMode mode = ExecMode::Serial);

// Core scoring over pre-converted double rows; the selection loop shares one
// converted candidate matrix across all per-group models.
std::vector<double> score_feature_rows(const ClassifierModel& model, const double* rows,
                                       std::size_t n_rows, std::size_t cols,
                                       ExecMode mode = ExecMode::Serial);

} // namespace covsel
