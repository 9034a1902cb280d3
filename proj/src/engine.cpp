#include "covsel/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "covsel/rng.hpp"
#include "covsel/text_util.hpp"

namespace covsel {

namespace {

// Independent random streams; everything a run draws flows from one of
// these, so results never depend on call interleaving.
constexpr std::uint64_t kSelectionStream = 11;
constexpr std::uint64_t kReferenceStream = 12;
constexpr std::uint64_t kClassifierStream = 13;

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

} // namespace

ClassifierSpec default_classifier_spec(ClassifierKind kind) {
    ClassifierSpec s;
    s.kind = kind;
    switch (kind) {
    case ClassifierKind::Dt:
        s.cart = CartParams{std::nullopt, Splitter::Best, 2, 0};
        break;
    case ClassifierKind::Dcdt:
        s.cart = CartParams{3, Splitter::Best, 2, 0};
        break;
    case ClassifierKind::Dcrdt:
        s.cart = CartParams{3, Splitter::Random, 2, 0};
        break;
    default:
        break; // family defaults already match the stock settings
    }
    return s;
}

ClassifierKind classifier_kind_from_name(const std::string& name) {
    if (name == "dummy" || name == "baseline")
        return ClassifierKind::Dummy;
    if (name == "dt")
        return ClassifierKind::Dt;
    if (name == "dcdt")
        return ClassifierKind::Dcdt;
    if (name == "dcrdt")
        return ClassifierKind::Dcrdt;
    if (name == "rf")
        return ClassifierKind::Rf;
    if (name == "gb")
        return ClassifierKind::Gb;
    if (name == "lr")
        return ClassifierKind::Lr;
    if (name == "nn")
        return ClassifierKind::Nn;
    if (name == "nb")
        return ClassifierKind::Nb;
    throw Error("unknown classifier '" + name + "'");
}

const char* classifier_config_name(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::Dummy: return "dummy";
    case ClassifierKind::Dt: return "dt";
    case ClassifierKind::Dcdt: return "dcdt";
    case ClassifierKind::Dcrdt: return "dcrdt";
    case ClassifierKind::Rf: return "rf";
    case ClassifierKind::Gb: return "gb";
    case ClassifierKind::Lr: return "lr";
    case ClassifierKind::Nn: return "nn";
    case ClassifierKind::Nb: return "nb";
    }
    return "?";
}

const char* classifier_display_name(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::Dummy: return "Baseline";
    case ClassifierKind::Dt: return "DT";
    case ClassifierKind::Dcdt: return "DCDT";
    case ClassifierKind::Dcrdt: return "DCRDT";
    case ClassifierKind::Rf: return "RF";
    case ClassifierKind::Gb: return "GB";
    case ClassifierKind::Lr: return "LR";
    case ClassifierKind::Nn: return "NN";
    case ClassifierKind::Nb: return "NB";
    }
    return "?";
}

ClassifierModel train_classifier(const ClassifierSpec& spec, const Dataset& data, std::uint64_t seed) {
    switch (spec.kind) {
    case ClassifierKind::Dummy:
        return train_dummy(data, seed);
    case ClassifierKind::Dt:
    case ClassifierKind::Dcdt:
    case ClassifierKind::Dcrdt: {
        CartParams p = spec.cart;
        p.seed = seed;
        return train_cart_model(data, p);
    }
    case ClassifierKind::Rf: {
        ForestParams p = spec.forest;
        p.seed = seed;
        return train_random_forest(data, p);
    }
    case ClassifierKind::Gb: {
        GradBoostParams p = spec.gb;
        p.seed = seed;
        return train_gradient_boosting(data, p);
    }
    case ClassifierKind::Lr: {
        LogRegParams p = spec.lr;
        p.seed = seed;
        return train_logistic_regression(data, p);
    }
    case ClassifierKind::Nn: {
        MlpParams p = spec.mlp;
        p.seed = seed;
        return train_mlp(data, p);
    }
    case ClassifierKind::Nb:
        return train_naive_bayes(data, spec.nb);
    }
    throw Error("unhandled classifier kind");
}

double ExperimentConfig::effective_stop() const {
    if (stop_coverage)
        return *stop_coverage;
    return checkpoints.empty() ? 1.0 : checkpoints.back();
}

void ExperimentConfig::validate() const {
    if (warmup_batch < 1)
        throw Error("warmup_batch must be at least 1");
    if (!(cds_trigger > 0.0) || cds_trigger > 1.0)
        throw Error("cds_trigger must lie in (0, 1]");
    if (min_support < 1)
        throw Error("min_support must be at least 1");
    for (double c : checkpoints)
        if (!(c >= 0.0) || c > 1.0)
            throw Error("checkpoints must lie in [0, 1]");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw Error("checkpoints must be sorted ascending");
    if (stop_coverage && (!(*stop_coverage > 0.0) || *stop_coverage > 1.0))
        throw Error("stop_coverage must lie in (0, 1]");
}

std::optional<std::uint64_t> RunRecord::tests_to(double level) const {
    for (const auto& c : checkpoints)
        if (c.level == level)
            return c.tests;
    return std::nullopt;
}

namespace {

const char* phase_name(Phase p) { return p == Phase::Warmup ? "warmup" : "cds"; }
const char* kind_name(SelectionKind k) { return k == SelectionKind::Batch ? "batch" : "model"; }

// One in-flight selection experiment over a shared pool.
class Runner {
public:
    Runner(const ExperimentDatabase& db, const DutProfile& profile, const ExperimentConfig& cfg)
        : db_(db), profile_(profile), cfg_(cfg), hitdb_(profile.model()),
          selection_rng_(derive_seed(cfg.seed, {kSelectionStream})) {
        cfg_.validate();
        if (db_.size() == 0)
            throw Error("experiment database is empty");
        stop_level_ = cfg_.effective_stop();
        pool_.resize(db_.size());
        std::iota(pool_.begin(), pool_.end(), 0);
        pool_pos_.resize(db_.size());
        std::iota(pool_pos_.begin(), pool_pos_.end(), 0);
        simulated_flag_.assign(db_.size(), 0);
        for (double level : cfg_.checkpoints)
            rec_.checkpoints.push_back({level, std::nullopt});
        encoded_ = encode_batch(profile_, db_.tests, cfg_.exec);
        cards_ = encoded_cardinalities(profile_);
        update_checkpoints();
    }

    RunRecord run(bool allow_cds) {
        double t0 = now_ms();
        bool triggered = false;
        while (!stopped() && !pool_empty()) {
            run_batch(Phase::Warmup);
            if (stopped() || pool_empty())
                break;
            if (allow_cds && coverage() >= cfg_.cds_trigger) {
                triggered = true;
                break;
            }
        }
        rec_.wall_ms_warmup = now_ms() - t0;

        if (triggered) {
            double t1 = now_ms();
            cds_loop();
            rec_.wall_ms_cds = now_ms() - t1;
        }

        rec_.exhausted = pool_empty() && !stopped();
        rec_.final_coverage = coverage();
        return std::move(rec_);
    }

private:
    bool pool_empty() const { return pool_.empty(); }

    double coverage() const {
        return cfg_.reachable_basis ? hitdb_.reachable_coverage_percent()
                                    : hitdb_.coverage_percent();
    }

    bool stopped() const { return coverage() >= stop_level_; }

    void update_checkpoints() {
        double cov = coverage();
        for (auto& c : rec_.checkpoints)
            if (!c.tests && cov >= c.level)
                c.tests = rec_.log.size();
    }

    void remove_from_pool(std::uint32_t test_id) {
        std::size_t pos = pool_pos_[test_id];
        std::uint32_t last = pool_.back();
        pool_[pos] = last;
        pool_pos_[last] = pos;
        pool_.pop_back();
    }

    std::uint32_t draw_random() {
        std::size_t pos = static_cast<std::size_t>(selection_rng_.next_below(pool_.size()));
        std::uint32_t id = pool_[pos];
        remove_from_pool(id);
        return id;
    }

    void simulate(std::uint32_t test_id, Phase phase, SelectionKind kind) {
        hitdb_.record_simulation(test_id, db_.precomputed_hits[test_id]);
        simulated_flag_[test_id] = 1;
        rec_.log.push_back({test_id, iteration_, phase, kind, 0.0});
        rec_.log.back().coverage_after = coverage();
        update_checkpoints();
    }

    void run_batch(Phase phase) {
        for (std::uint32_t i = 0; i < cfg_.warmup_batch; ++i) {
            if (stopped() || pool_empty())
                break;
            simulate(draw_random(), phase, SelectionKind::Batch);
        }
        ++iteration_;
    }

    void cds_loop() {
        std::vector<char> claimed(db_.size(), 0);
        while (!stopped() && !pool_empty()) {
            auto targets = hitdb_.target_groups(cfg_.min_support);

            std::vector<std::pair<std::uint32_t, std::uint32_t>> selections; // (group, test)
            if (!targets.empty()) {
                // Ascending unsimulated ids; scoring output stays aligned.
                // The converted feature rows are shared by every group model.
                std::vector<std::uint32_t> candidates;
                candidates.reserve(pool_.size());
                for (std::uint32_t id = 0; id < db_.size(); ++id)
                    if (!simulated_flag_[id])
                        candidates.push_back(id);
                std::size_t cols = encoded_.cols;
                std::vector<double> features(candidates.size() * cols);
                parallel_for(candidates.size(), cfg_.exec, [&](std::size_t i) {
                    const std::uint16_t* src = encoded_.row(candidates[i]);
                    for (std::size_t c = 0; c < cols; ++c)
                        features[i * cols + c] = static_cast<double>(src[c]);
                });

                // One fresh model per target group, trained and scored on an
                // immutable snapshot. Groups are independent tasks.
                std::vector<std::optional<std::vector<double>>> group_scores(targets.size());
                double t0 = now_ms();
                parallel_for(targets.size(), cfg_.exec, [&](std::size_t ti) {
                    std::uint32_t g = targets[ti];
                    auto [pos, neg] = label_tests(hitdb_, g);
                    GroupTrainingSet ts;
                    try {
                        ts = build_training_set(g, pos, neg, encoded_, cards_, cfg_.min_support,
                                                derive_seed(cfg_.seed, {kReferenceStream, iteration_, g}));
                    } catch (const InsufficientSupport&) {
                        return; // skipped this iteration
                    }
                    ClassifierModel model =
                        train_classifier(cfg_.classifier, ts.dataset,
                                         derive_seed(cfg_.seed, {kClassifierStream, iteration_, g}));
                    group_scores[ti] = score_feature_rows(model, features.data(), candidates.size(),
                                                          cols, ExecMode::Serial);
                });
                double train_ms = now_ms() - t0;
                rec_.train_ms_total += train_ms;
                rec_.iteration_train_ms.push_back(train_ms);

                // Deterministic merge in ascending group order: each group
                // claims its best-scored unclaimed candidate, ties to the
                // lowest test id. A collision costs the later group its top
                // pick; it takes its next best distinct candidate instead.
                for (std::size_t ti = 0; ti < targets.size(); ++ti) {
                    if (!group_scores[ti])
                        continue;
                    const auto& scores = *group_scores[ti];
                    std::size_t best = candidates.size();
                    double best_score = -1.0;
                    for (std::size_t i = 0; i < candidates.size(); ++i) {
                        if (claimed[candidates[i]])
                            continue;
                        if (scores[i] > best_score) {
                            best_score = scores[i];
                            best = i;
                        }
                    }
                    if (best < candidates.size()) {
                        claimed[candidates[best]] = 1;
                        selections.emplace_back(targets[ti], candidates[best]);
                    }
                }
            }

            if (selections.empty()) {
                // No trainable target group: progress must continue, fall
                // back to one random batch inside the CDS phase.
                run_batch(Phase::Cds);
                continue;
            }

            for (const auto& [group, test_id] : selections) {
                (void)group;
                if (stopped() || pool_empty())
                    break;
                remove_from_pool(test_id);
                simulate(test_id, Phase::Cds, SelectionKind::Model);
            }
            // claims are per-iteration
            for (const auto& [group, test_id] : selections)
                claimed[test_id] = 0;
            ++iteration_;
        }
    }

    const ExperimentDatabase& db_;
    const DutProfile& profile_;
    ExperimentConfig cfg_;
    HitDatabase hitdb_;
    Rng selection_rng_;
    RunRecord rec_;
    std::vector<std::uint32_t> pool_;
    std::vector<std::size_t> pool_pos_;
    std::vector<char> simulated_flag_;
    EncodedMatrix encoded_;
    std::vector<std::uint16_t> cards_;
    double stop_level_ = 1.0;
    std::uint32_t iteration_ = 0;
};

} // namespace

RunRecord run_random_baseline(const ExperimentDatabase& db, const DutProfile& profile,
                              const ExperimentConfig& config) {
    return Runner(db, profile, config).run(false);
}

RunRecord run_cds(const ExperimentDatabase& db, const DutProfile& profile,
                  const ExperimentConfig& config) {
    return Runner(db, profile, config).run(config.mode == SelectionMode::Cds);
}

double compute_savings(double cds_count, double random_count) {
    if (!(random_count > 0.0))
        throw Error("savings need a positive random-selection count");
    double pct = 100.0 * (cds_count - random_count) / random_count;
    return std::round(pct * 100.0) / 100.0;
}

// --- run record io -----------------------------------------------------------

std::string RunRecord::serialize_canonical() const {
    std::ostringstream out;
    out << header_line("run");
    for (std::size_t i = 0; i < log.size(); ++i) {
        const auto& e = log[i];
        out << "sim " << i << ' ' << e.test_id << ' ' << e.iteration << ' ' << phase_name(e.phase)
            << ' ' << kind_name(e.selection) << ' ' << format_double(e.coverage_after) << '\n';
    }
    for (const auto& c : checkpoints) {
        out << "checkpoint " << format_double(c.level) << ' ';
        if (c.tests)
            out << *c.tests;
        else
            out << '-';
        out << '\n';
    }
    out << "exhausted " << (exhausted ? 1 : 0) << '\n';
    out << "final " << format_double(final_coverage) << '\n';
    return out.str();
}

RunRecord RunRecord::parse_canonical(const std::string& text) {
    std::vector<std::string> lines;
    for (auto part : split_view(text, '\n'))
        lines.emplace_back(part);
    expect_header(lines, "run");

    RunRecord rec;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::size_t ln = i + 1;
        auto toks = tokenize(lines[i]);
        if (toks.empty())
            continue;
        if (toks[0] == "sim") {
            if (toks.size() != 7)
                throw ParseError("malformed sim record", ln);
            SimulationEntry e;
            e.test_id = static_cast<std::uint32_t>(parse_u64(toks[2], ln));
            e.iteration = static_cast<std::uint32_t>(parse_u64(toks[3], ln));
            if (toks[4] == "warmup")
                e.phase = Phase::Warmup;
            else if (toks[4] == "cds")
                e.phase = Phase::Cds;
            else
                throw ParseError("unknown phase", ln);
            if (toks[5] == "batch")
                e.selection = SelectionKind::Batch;
            else if (toks[5] == "model")
                e.selection = SelectionKind::Model;
            else
                throw ParseError("unknown selection kind", ln);
            e.coverage_after = parse_double(toks[6], ln);
            rec.log.push_back(e);
        } else if (toks[0] == "checkpoint") {
            if (toks.size() != 3)
                throw ParseError("malformed checkpoint record", ln);
            CheckpointHit c;
            c.level = parse_double(toks[1], ln);
            if (toks[2] != "-")
                c.tests = parse_u64(toks[2], ln);
            rec.checkpoints.push_back(c);
        } else if (toks[0] == "exhausted") {
            rec.exhausted = toks.size() > 1 && toks[1] == "1";
        } else if (toks[0] == "final") {
            rec.final_coverage = parse_double(toks.at(1), ln);
        } else {
            throw ParseError("unknown record '" + std::string(toks[0]) + "'", ln);
        }
    }
    return rec;
}

void RunRecord::save(const std::string& path) const { write_file(path, serialize_canonical()); }

RunRecord RunRecord::load(const std::string& path) { return parse_canonical(read_file(path)); }

std::string RunRecord::curve_data() const {
    std::ostringstream out;
    out << header_line("curve");
    out << "tests\tcoverage\n0\t0\n";
    for (std::size_t i = 0; i < log.size(); ++i)
        out << (i + 1) << '\t' << format_double(log[i].coverage_after) << '\n';
    return out.str();
}

// --- classifier comparison ---------------------------------------------------

ComparisonReport compare_classifiers(const ExperimentDatabase& db, const DutProfile& profile,
                                     const ExperimentConfig& base,
                                     const std::vector<ClassifierKind>& roster,
                                     const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty())
        throw Error("comparison needs at least one seed");

    ComparisonReport report;
    report.checkpoints = base.checkpoints;
    report.seeds = seeds;
    report.columns.push_back("Random");
    for (ClassifierKind k : roster)
        report.columns.push_back(classifier_display_name(k));

    std::size_t n_cols = report.columns.size();
    std::size_t n_rows = base.checkpoints.size();
    report.cells.assign(n_rows, std::vector<ComparisonCell>(n_cols));

    // column -> per-checkpoint mean, random first
    auto run_column = [&](std::optional<ClassifierKind> kind, std::size_t col) {
        std::vector<std::vector<std::uint64_t>> reached(n_rows);
        std::string err;
        for (std::uint64_t seed : seeds) {
            ExperimentConfig cfg = base;
            cfg.seed = seed;
            if (kind) {
                cfg.mode = SelectionMode::Cds;
                cfg.classifier = default_classifier_spec(*kind);
            } else {
                cfg.mode = SelectionMode::Random;
            }
            try {
                RunRecord rec = kind ? run_cds(db, profile, cfg) : run_random_baseline(db, profile, cfg);
                for (std::size_t r = 0; r < n_rows; ++r)
                    if (auto t = rec.tests_to(base.checkpoints[r]))
                        reached[r].push_back(*t);
            } catch (const Error& e) {
                if (err.empty())
                    err = e.what();
            }
        }
        for (std::size_t r = 0; r < n_rows; ++r) {
            auto& cell = report.cells[r][col];
            if (!err.empty()) {
                cell.note = err;
                continue;
            }
            if (reached[r].size() != seeds.size()) {
                cell.note = "unreached " + std::to_string(reached[r].size()) + "/" +
                            std::to_string(seeds.size());
                continue;
            }
            double sum = 0.0;
            for (std::uint64_t t : reached[r])
                sum += static_cast<double>(t);
            cell.mean_tests = sum / static_cast<double>(seeds.size());
        }
    };

    run_column(std::nullopt, 0);
    for (std::size_t i = 0; i < roster.size(); ++i)
        run_column(roster[i], i + 1);

    for (std::size_t r = 0; r < n_rows; ++r)
        for (std::size_t c = 1; c < n_cols; ++c) {
            auto& cell = report.cells[r][c];
            const auto& random_cell = report.cells[r][0];
            if (cell.mean_tests && random_cell.mean_tests && *random_cell.mean_tests > 0)
                cell.savings = compute_savings(*cell.mean_tests, *random_cell.mean_tests);
        }
    return report;
}

namespace {

std::string format_count(double v) {
    double rounded = std::round(v);
    if (std::abs(v - rounded) < 1e-9) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", rounded);
        return buf;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string format_savings(double v) {
    char buf[32];
    if (v == 0.0)
        std::snprintf(buf, sizeof(buf), "0.00%%");
    else
        std::snprintf(buf, sizeof(buf), "%+.2f%%", v);
    return buf;
}

std::string format_level(double level) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g%%", level * 100.0);
    return buf;
}

} // namespace

std::string ComparisonReport::to_aligned_text() const {
    std::size_t n_cols = columns.size() + 1;
    std::vector<std::vector<std::string>> rows;

    std::vector<std::string> head{"Functional Coverage"};
    head.insert(head.end(), columns.begin(), columns.end());
    rows.push_back(head);

    for (std::size_t r = 0; r < checkpoints.size(); ++r) {
        std::vector<std::string> row{format_level(checkpoints[r])};
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto& cell = cells[r][c];
            row.push_back(cell.mean_tests ? format_count(*cell.mean_tests)
                                          : (cell.note.empty() ? "-" : cell.note));
        }
        rows.push_back(row);
    }

    rows.push_back({"Savings (vs. Random)"});
    for (std::size_t r = 0; r < checkpoints.size(); ++r) {
        std::vector<std::string> row{format_level(checkpoints[r])};
        row.push_back(""); // random column has no savings entry
        for (std::size_t c = 1; c < columns.size(); ++c) {
            const auto& cell = cells[r][c];
            row.push_back(cell.savings ? format_savings(*cell.savings) : "");
        }
        rows.push_back(row);
    }

    std::vector<std::size_t> width(n_cols, 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());

    std::ostringstream out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c)
                out << " | ";
            out << row[c];
            for (std::size_t pad = row[c].size(); pad < width[c]; ++pad)
                out << ' ';
        }
        out << '\n';
    }
    return out.str();
}

std::string ComparisonReport::to_tsv() const {
    std::ostringstream out;
    out << header_line("compare");
    out << "coverage";
    for (const auto& c : columns)
        out << '\t' << c;
    out << '\n';
    for (std::size_t r = 0; r < checkpoints.size(); ++r) {
        out << format_double(checkpoints[r]);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto& cell = cells[r][c];
            out << '\t' << (cell.mean_tests ? format_double(*cell.mean_tests) : "-");
        }
        out << '\n';
    }
    for (std::size_t r = 0; r < checkpoints.size(); ++r) {
        out << "savings:" << format_double(checkpoints[r]);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            const auto& cell = cells[r][c];
            out << '\t' << (cell.savings ? format_double(*cell.savings) : "-");
        }
        out << '\n';
    }
    return out.str();
}

} // namespace covsel
