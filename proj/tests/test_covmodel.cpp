#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>

#include "covsel/builtin_profiles.hpp"
#include "covsel/coverage_model.hpp"
#include "covsel/rng.hpp"
#include "covsel/stimulus.hpp"

using namespace covsel;

namespace {

// Four points in two groups, no gates.
CoverageModel tiny_model() {
    std::vector<CoveragePoint> points(4);
    for (std::uint32_t i = 0; i < 4; ++i) {
        points[i].id = i;
        points[i].group_id = i / 2;
        points[i].predicate = {{0, static_cast<std::uint16_t>(i % 2)}};
    }
    std::vector<CoverageGroup> groups(2);
    groups[0] = {0, "a", {0, 1}};
    groups[1] = {1, "b", {2, 3}};
    return CoverageModel(std::move(points), std::move(groups));
}

} // namespace

TEST_CASE("model rejects broken partitions") {
    // point in two groups
    std::vector<CoveragePoint> points(2);
    points[0] = {0, 0, {{0, 0}}};
    points[1] = {1, 0, {{0, 1}}};
    std::vector<CoverageGroup> groups(2);
    groups[0] = {0, "a", {0, 1}};
    groups[1] = {1, "b", {1}};
    CHECK_THROWS_AS(CoverageModel(std::move(points), std::move(groups)), Error);

    // empty model
    CHECK_THROWS_AS(CoverageModel({}, {}), Error);
}

TEST_CASE("record_simulation with empty hit set") {
    CoverageModel model = tiny_model();
    HitDatabase db(model);
    db.record_simulation(7, {});
    CHECK(db.coverage_percent() == 0.0);
    CHECK(db.simulated() == std::vector<std::uint32_t>{7});
}

TEST_CASE("coverage counts hit points over all points") {
    CoverageModel model = tiny_model();
    HitDatabase db(model);
    std::vector<std::uint32_t> hits{1, 3};
    db.record_simulation(0, hits);
    CHECK(db.coverage_percent() == doctest::Approx(0.5));

    db.record_simulation(1, std::vector<std::uint32_t>{0, 2});
    CHECK(db.coverage_percent() == 1.0);
}

TEST_CASE("duplicate simulation is rejected") {
    CoverageModel model = tiny_model();
    HitDatabase db(model);
    db.record_simulation(0, std::vector<std::uint32_t>{1});
    CHECK_THROWS_AS(db.record_simulation(0, std::vector<std::uint32_t>{2}), DuplicateSimulation);
}

TEST_CASE("coverage is monotone and hit counts recomputable") {
    CoverageModel model = tiny_model();
    HitDatabase db(model);
    Rng rng(3);
    double prev = 0.0;
    for (std::uint32_t t = 0; t < 40; ++t) {
        std::vector<std::uint32_t> hits;
        for (std::uint32_t p = 0; p < 4; ++p)
            if (rng.next_below(3) == 0)
                hits.push_back(p);
        db.record_simulation(t, hits);
        CHECK(db.coverage_percent() >= prev);
        prev = db.coverage_percent();
    }
    CHECK(db.verify_hit_counts());
}

TEST_CASE("target_groups needs a hole and enough support") {
    CoverageModel model = tiny_model();
    HitDatabase db(model);

    // group 0 fully covered, group 1 half covered
    for (std::uint32_t t = 0; t < 12; ++t)
        db.record_simulation(t, std::vector<std::uint32_t>{0, 1, 2});

    auto targets = db.target_groups(10);
    CHECK(targets == std::vector<std::uint32_t>{1}); // group 0 has no hole

    // min_support above the exerciser count excludes the group
    CHECK(db.target_groups(13).empty());

    // a fully covered model yields nothing
    db.record_simulation(99, std::vector<std::uint32_t>{3});
    CHECK(db.target_groups(1).empty());
}

TEST_CASE("group with holes but no exercisers is not a target") {
    CoverageModel model = tiny_model();
    HitDatabase db(model);
    for (std::uint32_t t = 0; t < 12; ++t)
        db.record_simulation(t, std::vector<std::uint32_t>{0, 1});
    // group 1 has holes but zero exercising tests
    CHECK(db.target_groups(1) == std::vector<std::uint32_t>{});
}

TEST_CASE("target_groups output is sorted and never contains covered groups") {
    DutProfile profile = make_mini_rspu_profile();
    const auto& model = profile.model();
    HitDatabase db(model);
    ConstraintSpec spec(profile);
    auto tests = generate_tests(profile, spec, 400, 17);
    for (std::uint32_t t = 0; t < tests.size(); ++t)
        db.record_simulation(t, simulate(profile, tests[t]));

    auto targets = db.target_groups(5);
    CHECK(std::is_sorted(targets.begin(), targets.end()));
    for (std::uint32_t g : targets)
        CHECK(db.group_unhit_reachable(g) > 0);
}

TEST_CASE("hit database round-trips through its file format") {
    CoverageModel model = tiny_model();
    HitDatabase db(model);
    db.record_simulation(5, std::vector<std::uint32_t>{0, 3});
    db.record_simulation(2, std::vector<std::uint32_t>{});
    db.record_simulation(9, std::vector<std::uint32_t>{1, 2, 3});

    std::string path = "hitdb_roundtrip.txt";
    db.save(path);
    HitDatabase loaded = HitDatabase::load(path, model);
    CHECK(loaded.simulated() == db.simulated());
    CHECK(loaded.coverage_percent() == db.coverage_percent());
    CHECK(loaded.hits_of(9) == db.hits_of(9));
    CHECK(loaded.verify_hit_counts());
    std::remove(path.c_str());
}
