#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>

#include "covsel/builtin_profiles.hpp"
#include "covsel/engine.hpp"

using namespace covsel;

// The OpenMP kernels must reproduce the serial reference bit for bit; these
// tests pin that equivalence for every parallel entry point.

TEST_CASE("parallel_for covers every index exactly once") {
    for (ExecMode mode : {ExecMode::Serial, ExecMode::OpenMp}) {
        std::vector<std::atomic<int>> hits(257);
        for (auto& h : hits)
            h = 0;
        parallel_for(hits.size(), mode, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits)
            CHECK(h == 1);
    }
}

TEST_CASE("parallel_for propagates exceptions from workers") {
    for (ExecMode mode : {ExecMode::Serial, ExecMode::OpenMp}) {
        try {
            parallel_for(64, mode, [&](std::size_t i) {
                if (i == 5)
                    throw IllegalStimulus("boom at 5");
            });
            FAIL("expected a throw");
        } catch (const IllegalStimulus& e) {
            CHECK(std::string(e.what()).find("5") != std::string::npos);
        }
    }
}

TEST_CASE("batch encoding is mode-independent") {
    DutProfile p = make_mini_rspu_profile();
    ConstraintSpec spec(p);
    auto tests = generate_tests(p, spec, 2000, 3);
    EncodedMatrix a = encode_batch(p, tests, ExecMode::Serial);
    EncodedMatrix b = encode_batch(p, tests, ExecMode::OpenMp);
    CHECK(a.data == b.data);
}

TEST_CASE("batch simulation is mode-independent") {
    DutProfile p = make_mini_rspu_profile();
    ConstraintSpec spec(p);
    auto tests = generate_tests(p, spec, 1500, 4);
    CHECK(simulate_all(p, tests, ExecMode::Serial) == simulate_all(p, tests, ExecMode::OpenMp));
}

TEST_CASE("candidate scoring is mode-independent for every model family") {
    DutProfile p = make_mini_rspu_profile();
    ConstraintSpec spec(p);
    auto tests = generate_tests(p, spec, 600, 5);
    EncodedMatrix m = encode_batch(p, tests);

    Dataset d;
    Rng rng(6);
    for (int i = 0; i < 80; ++i) {
        std::vector<double> row(m.cols);
        std::size_t src = rng.next_below(m.rows);
        for (std::size_t c = 0; c < m.cols; ++c)
            row[c] = m.at(src, c);
        d.add_row(row, static_cast<int>(rng.next_below(2)));
    }

    std::vector<ClassifierModel> models;
    models.push_back(train_cart_model(d, {}));
    models.push_back(train_gradient_boosting(d, {25, 0.1, 3, 0}));
    models.push_back(train_naive_bayes(d, {1.0}));
    models.push_back(train_logistic_regression(d, {50, 0.1, 1e-4, 0}));
    for (const auto& model : models)
        CHECK(score_candidates(model, m, ExecMode::Serial) ==
              score_candidates(model, m, ExecMode::OpenMp));

    // dummy consumes its stream identically under both modes
    ClassifierModel d1 = train_dummy(d, 99);
    ClassifierModel d2 = train_dummy(d, 99);
    CHECK(score_candidates(d1, m, ExecMode::Serial) == score_candidates(d2, m, ExecMode::OpenMp));
}

TEST_CASE("database construction hit precomputation is mode-independent") {
    DutProfile p = make_mini_radar_profile();
    ExperimentDatabase a = build_experiment_database(p, 600, 200, 8, {10, 64, ExecMode::Serial});
    ExperimentDatabase b = build_experiment_database(p, 600, 200, 8, {10, 64, ExecMode::OpenMp});
    CHECK(a == b);
}

TEST_CASE("full selection runs are mode-independent") {
    DutProfile p = make_mini_radar_profile();
    ExperimentDatabase db = build_experiment_database(p, 600, 900, 12);

    ExperimentConfig cfg;
    cfg.warmup_batch = 100;
    cfg.cds_trigger = 0.85;
    cfg.min_support = 5;
    cfg.checkpoints = {0.9, 0.99};
    cfg.stop_coverage = 0.99;
    cfg.seed = 4;
    cfg.classifier = default_classifier_spec(ClassifierKind::Gb);
    cfg.classifier.gb.n_stages = 25;

    cfg.exec = ExecMode::Serial;
    RunRecord serial = run_cds(db, p, cfg);
    cfg.exec = ExecMode::OpenMp;
    RunRecord openmp = run_cds(db, p, cfg);
    CHECK(serial.serialize_canonical() == openmp.serialize_canonical());
}
