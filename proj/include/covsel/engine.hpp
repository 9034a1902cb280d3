#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covsel/dut.hpp"
#include "covsel/extraction.hpp"
#include "covsel/learners.hpp"

namespace covsel {

enum class SelectionMode { Random, Cds };

enum class ClassifierKind { Dummy, Dt, Dcdt, Dcrdt, Rf, Gb, Lr, Nn, Nb };

// Kind plus the per-family hyperparameters. Only the block matching `kind`
// is consulted; default_classifier_spec fills it with the stock settings.
struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::Gb;
    CartParams cart;
    ForestParams forest;
    GradBoostParams gb;
    LogRegParams lr;
    NaiveBayesParams nb;
    MlpParams mlp;
};

ClassifierSpec default_classifier_spec(ClassifierKind kind);
ClassifierKind classifier_kind_from_name(const std::string& name);
const char* classifier_config_name(ClassifierKind kind);
const char* classifier_display_name(ClassifierKind kind); // table column header
ClassifierModel train_classifier(const ClassifierSpec& spec, const Dataset& data, std::uint64_t seed);

struct ExperimentConfig {
    SelectionMode mode = SelectionMode::Cds;
    ClassifierSpec classifier;
    std::uint32_t warmup_batch = 1000;
    double cds_trigger = 0.90;
    std::uint64_t min_support = 10;
    std::vector<double> checkpoints = {0.95, 0.98, 0.99};
    // Run ends at this coverage; defaults to the highest checkpoint.
    std::optional<double> stop_coverage;
    // Measure coverage against reachable points (the synthetic benches know
    // their unreachable fraction exactly) or against all points.
    bool reachable_basis = true;
    std::uint64_t seed = 1;
    ExecMode exec = ExecMode::Serial;

    double effective_stop() const;
    void validate() const; // throws Error with a message suitable for exit code 2
};

enum class Phase { Warmup, Cds };
enum class SelectionKind { Batch, Model };

struct SimulationEntry {
    std::uint32_t test_id = 0;
    std::uint32_t iteration = 0;
    Phase phase = Phase::Warmup;
    SelectionKind selection = SelectionKind::Batch;
    double coverage_after = 0.0;
};

struct CheckpointHit {
    double level = 0.0;
    std::optional<std::uint64_t> tests; // simulations consumed when reached
};

struct RunRecord {
    std::vector<SimulationEntry> log;
    std::vector<CheckpointHit> checkpoints;
    bool exhausted = false;
    double final_coverage = 0.0;

    // Wall-clock bookkeeping; all timing lives outside the canonical
    // serialization so that identical (db, config, seed) runs produce
    // byte-identical record files.
    double wall_ms_warmup = 0.0;
    double wall_ms_cds = 0.0;
    double train_ms_total = 0.0;
    std::vector<double> iteration_train_ms;

    std::optional<std::uint64_t> tests_to(double level) const;

    std::string serialize_canonical() const;
    static RunRecord parse_canonical(const std::string& text);
    void save(const std::string& path) const;
    static RunRecord load(const std::string& path);

    // tests-vs-coverage table for plotting.
    std::string curve_data() const;
};

// Uniform sampling without replacement until the stop criterion.
RunRecord run_random_baseline(const ExperimentDatabase& db, const DutProfile& profile,
                              const ExperimentConfig& config);

// Random warmup batches until the trigger coverage, then per-iteration
// group-targeted selection: label, build a balanced training set, train a
// fresh model per target group, score all unsimulated candidates and
// simulate each group's best unclaimed candidate.
RunRecord run_cds(const ExperimentDatabase& db, const DutProfile& profile,
                  const ExperimentConfig& config);

// Signed percentage change in tests, negative = saving, rounded to 2
// decimals.
double compute_savings(double cds_count, double random_count);

struct ComparisonCell {
    std::optional<double> mean_tests;
    std::optional<double> savings; // vs the random column
    std::string note;              // error or "unreached"
};

struct ComparisonReport {
    std::vector<double> checkpoints;
    std::vector<std::string> columns; // "Random" first, then the roster
    std::vector<std::vector<ComparisonCell>> cells; // [checkpoint][column]
    std::vector<std::uint64_t> seeds;

    std::string to_aligned_text() const;
    std::string to_tsv() const;
};

// Runs every roster entry plus the random baseline over the same seed set
// and reports mean tests-to-checkpoint and savings. A failing cell is
// annotated and leaves the rest of the table intact.
ComparisonReport compare_classifiers(const ExperimentDatabase& db, const DutProfile& profile,
                                     const ExperimentConfig& base,
                                     const std::vector<ClassifierKind>& roster,
                                     const std::vector<std::uint64_t>& seeds);

} // namespace covsel
