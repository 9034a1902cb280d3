#pragma once

#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "covsel/coverage_model.hpp"
#include "covsel/parallel.hpp"

namespace covsel {

// A stimulus: one raw value per configuration field, in profile field order.
// Enum fields store the index of the symbol, binary fields 0/1, wide fields
// the full 32-bit value.
using TestVector = std::vector<std::uint32_t>;

// Encoded feature row: binary as-is, enums as ordinal index, wide fields as
// power-of-two bucket.
using EncodedVector = std::vector<std::uint16_t>;

enum class FieldKind { Binary, Enum, Wide32 };

struct ConfigField {
    std::string name;
    FieldKind kind = FieldKind::Binary;
    std::vector<std::string> values; // enum symbols, declaration order = ordinal

    std::uint16_t encoded_cardinality() const {
        switch (kind) {
        case FieldKind::Binary: return 2;
        case FieldKind::Enum: return static_cast<std::uint16_t>(values.size());
        case FieldKind::Wide32: return 33;
        }
        return 0;
    }
    bool legal_raw(std::uint32_t v) const {
        switch (kind) {
        case FieldKind::Binary: return v <= 1;
        case FieldKind::Enum: return v < values.size();
        case FieldKind::Wide32: return true;
        }
        return false;
    }
};

// Wide values are bucketed by powers of two; bucket 0 is reserved for the
// exact value 0, bucket b >= 1 covers [2^(b-1), 2^b).
inline std::uint16_t bucket_of(std::uint32_t v) {
    return static_cast<std::uint16_t>(std::bit_width(v));
}
inline std::pair<std::uint64_t, std::uint64_t> bucket_range(std::uint16_t bucket) {
    if (bucket == 0)
        return {0, 0};
    std::uint64_t lo = 1ull << (bucket - 1);
    std::uint64_t hi = (1ull << bucket) - 1;
    return {lo, hi};
}

enum class GateOp { Eq, Ge, Le };

struct GateAtom {
    std::uint16_t field = 0;
    GateOp op = GateOp::Eq;
    std::uint32_t value = 0; // raw units
};

// Conjunctive guard over raw field values. A point in a gated group is
// exercised only when the gate holds.
struct Gate {
    std::vector<GateAtom> atoms;
};

class DutProfile {
public:
    DutProfile(std::string name, std::vector<ConfigField> fields,
               std::vector<CoveragePoint> points, std::vector<CoverageGroup> groups,
               std::vector<std::optional<Gate>> gates);

    const std::string& name() const { return name_; }
    const std::vector<ConfigField>& fields() const { return fields_; }
    std::size_t field_count() const { return fields_.size(); }
    std::uint16_t field_index(const std::string& name) const;
    const CoverageModel& model() const { return *model_; }
    const std::optional<Gate>& gate(std::uint32_t group_id) const { return gates_[group_id]; }

    bool gate_satisfied(std::uint32_t group_id, const TestVector& raw) const;
    void check_legal(const TestVector& test) const; // throws IllegalStimulus

    void save(const std::string& path) const;
    static DutProfile load(const std::string& path);

private:
    friend std::vector<std::uint32_t> simulate(const DutProfile&, const TestVector&);

    void build_sim_index();
    void compute_reachability();

    std::string name_;
    std::vector<ConfigField> fields_;
    std::shared_ptr<CoverageModel> model_;
    std::vector<std::optional<Gate>> gates_;

    // Lookup structure: per group, per predicate field-set, a hash from the
    // encoded value tuple to candidate points. Exactness is restored by
    // re-checking the predicate on lookup.
    struct FieldSetBucket {
        std::vector<std::uint16_t> fields;
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> by_key;
    };
    std::vector<std::vector<FieldSetBucket>> sim_index_;
};

EncodedVector encode(const DutProfile& profile, const TestVector& test);

// Deterministic stand-in for DUT simulation: the set of coverage points
// (sorted ascending) whose predicate matches the encoded stimulus and whose
// group gate, if any, is satisfied by the raw stimulus.
std::vector<std::uint32_t> simulate(const DutProfile& profile, const TestVector& test);

// Headless batch form; OpenMP twin of a per-test loop over simulate().
std::vector<std::vector<std::uint32_t>> simulate_all(const DutProfile& profile,
                                                     const std::vector<TestVector>& tests,
                                                     ExecMode mode = ExecMode::Serial);

// Pre-simulated pool of stimuli: selection experiments sample from it
// without replacement and "simulating" a test is a lookup.
struct ExperimentDatabase {
    std::uint64_t seed = 0;
    std::uint32_t golden_count = 0;
    std::uint32_t filler_count = 0;
    std::vector<TestVector> tests; // test_id = index
    std::vector<std::vector<std::uint32_t>> precomputed_hits;
    std::vector<std::uint32_t> golden_ids;

    std::size_t size() const { return tests.size(); }

    bool operator==(const ExperimentDatabase&) const = default;
};

struct BuildOptions {
    // Filler draws satisfying any group gate are kept with probability
    // 1/gate_downweight, so fillers mostly re-hit easy coverage.
    std::uint32_t gate_downweight = 10;
    std::uint32_t retry_budget = 64;
    ExecMode exec = ExecMode::Serial;
};

// golden_count targeted tests whose union of hits covers every reachable
// point, plus filler_count biased constrained-random tests. Test ids are a
// seeded interleave of both sets. Reproducible bit-for-bit from the seed.
ExperimentDatabase build_experiment_database(const DutProfile& profile,
                                             std::uint32_t golden_count,
                                             std::uint32_t filler_count,
                                             std::uint64_t seed,
                                             const BuildOptions& opts = {});

void save_database(const ExperimentDatabase& db, const DutProfile& profile, const std::string& path);
ExperimentDatabase load_database(const std::string& path, const DutProfile& profile,
                                 bool verify = false, ExecMode mode = ExecMode::Serial);

// Re-simulates sample_count tests (all if 0) and compares against stored
// hits; throws ConsistencyError on mismatch.
void verify_database(const ExperimentDatabase& db, const DutProfile& profile,
                     std::size_t sample_count = 0, std::uint64_t seed = 1,
                     ExecMode mode = ExecMode::Serial);

} // namespace covsel
