#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "covsel/errors.hpp"

namespace covsel {

// One cross-product coverage point: hit when every (field, encoded value)
// pair of the predicate matches the encoded stimulus.
struct CoveragePoint {
    std::uint32_t id = 0;
    std::uint32_t group_id = 0;
    std::vector<std::pair<std::uint16_t, std::uint16_t>> predicate;
};

struct CoverageGroup {
    std::uint32_t group_id = 0;
    std::string name;
    std::vector<std::uint32_t> point_ids;
};

// Immutable set of points partitioned into named groups. Point and group ids
// are dense (0..n-1); the partition property is checked at construction.
class CoverageModel {
public:
    CoverageModel(std::vector<CoveragePoint> points, std::vector<CoverageGroup> groups);

    const std::vector<CoveragePoint>& points() const { return points_; }
    const std::vector<CoverageGroup>& groups() const { return groups_; }
    std::size_t point_count() const { return points_.size(); }
    std::size_t group_count() const { return groups_.size(); }

    const CoverageGroup& group_by_name(const std::string& name) const;

    // Reachability is decided by the DUT profile (gates can make some
    // predicates unsatisfiable); until it is set every point counts as
    // reachable. Coverage targets are always expressed against reachable
    // points, unreached-unreachable points are reported separately.
    void set_reachability(std::vector<char> reachable);
    bool reachable(std::uint32_t point_id) const { return reachable_[point_id] != 0; }
    std::size_t reachable_count() const { return reachable_count_; }

private:
    std::vector<CoveragePoint> points_;
    std::vector<CoverageGroup> groups_;
    std::vector<char> reachable_;
    std::size_t reachable_count_ = 0;
};

// Mutable record of which points each simulated test exercised. Single
// writer; concurrent readers are safe between mutations.
class HitDatabase {
public:
    explicit HitDatabase(const CoverageModel& model);

    // Appends one simulation result. Throws DuplicateSimulation if test_id
    // was already recorded: selection loops sample without replacement, a
    // repeat means the loop is broken.
    void record_simulation(std::uint32_t test_id, std::span<const std::uint32_t> points);

    // Hit points / all points.
    double coverage_percent() const;
    // Hit reachable points / reachable points.
    double reachable_coverage_percent() const;

    std::size_t covered_points() const { return covered_; }
    std::size_t covered_reachable_points() const { return covered_reachable_; }

    // Groups with at least one unhit reachable point that are exercised by
    // at least min_support distinct simulated tests, ascending group_id.
    std::vector<std::uint32_t> target_groups(std::uint64_t min_support) const;

    const std::vector<std::uint32_t>& simulated() const { return simulated_; }
    bool is_simulated(std::uint32_t test_id) const { return sim_index_.count(test_id) != 0; }
    const std::vector<std::uint32_t>& hits_of(std::uint32_t test_id) const;
    std::uint64_t hit_count(std::uint32_t point_id) const { return hit_counts_[point_id]; }
    bool point_hit(std::uint32_t point_id) const { return hit_counts_[point_id] > 0; }

    bool test_exercises_group(std::uint32_t test_id, std::uint32_t group_id) const;
    // Position-indexed access in simulation order; avoids the id hash on hot
    // labelling loops.
    std::span<const std::uint32_t> groups_of_position(std::size_t pos) const {
        return groups_per_test_[pos];
    }
    std::uint64_t group_exercise_count(std::uint32_t group_id) const { return group_exercisers_[group_id]; }
    std::uint32_t group_unhit_reachable(std::uint32_t group_id) const { return group_unhit_reachable_[group_id]; }

    const CoverageModel& model() const { return *model_; }

    // Recomputes hit_counts from the per-test hit lists and compares with
    // the incrementally maintained values.
    bool verify_hit_counts() const;

    void save(const std::string& path) const;
    static HitDatabase load(const std::string& path, const CoverageModel& model);

private:
    const CoverageModel* model_;
    std::vector<std::uint32_t> simulated_;
    std::unordered_map<std::uint32_t, std::uint32_t> sim_index_;
    std::vector<std::vector<std::uint32_t>> hits_per_test_;
    std::vector<std::vector<std::uint32_t>> groups_per_test_;
    std::vector<std::uint64_t> hit_counts_;
    std::vector<std::uint64_t> group_exercisers_;
    std::vector<std::uint32_t> group_unhit_reachable_;
    std::size_t covered_ = 0;
    std::size_t covered_reachable_ = 0;
};

} // namespace covsel
