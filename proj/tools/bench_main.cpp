// Times the OpenMP kernels against their serial reference implementations
// and checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <string>

#include "covsel/builtin_profiles.hpp"
#include "covsel/engine.hpp"

using namespace covsel;

namespace {

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

struct BenchResult {
    double serial_ms = 0.0;
    double openmp_ms = 0.0;
    bool identical = false;
};

void print_row(const char* name, const BenchResult& r) {
    std::printf("%-28s %10.1f ms %10.1f ms   %5.2fx   %s\n", name, r.serial_ms, r.openmp_ms,
                r.openmp_ms > 0 ? r.serial_ms / r.openmp_ms : 0.0,
                r.identical ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    std::size_t scale = 1;
    if (argc > 1)
        scale = std::stoul(argv[1]);

    std::printf("workers: serial=1 openmp=%d\n", worker_count(ExecMode::OpenMp));
    std::printf("%-28s %13s %13s %8s\n", "kernel", "serial", "openmp", "speedup");

    DutProfile profile = make_mini_rspu_profile();
    ConstraintSpec spec(profile);
    auto tests = generate_tests(profile, spec, 20000 * scale, 99);

    // batch simulation
    {
        BenchResult r;
        double t = now_ms();
        auto a = simulate_all(profile, tests, ExecMode::Serial);
        r.serial_ms = now_ms() - t;
        t = now_ms();
        auto b = simulate_all(profile, tests, ExecMode::OpenMp);
        r.openmp_ms = now_ms() - t;
        r.identical = a == b;
        print_row("simulate_all", r);
    }

    // batch encoding
    EncodedMatrix encoded;
    {
        BenchResult r;
        double t = now_ms();
        auto a = encode_batch(profile, tests, ExecMode::Serial);
        r.serial_ms = now_ms() - t;
        t = now_ms();
        encoded = encode_batch(profile, tests, ExecMode::OpenMp);
        r.openmp_ms = now_ms() - t;
        r.identical = a.data == encoded.data;
        print_row("encode_batch", r);
    }

    // candidate scoring with a boosted model
    {
        Dataset data;
        data.cols = encoded.cols;
        Rng rng(5);
        for (std::size_t i = 0; i < 400; ++i) {
            std::vector<double> row(encoded.cols);
            std::size_t src = rng.next_below(encoded.rows);
            for (std::size_t c = 0; c < encoded.cols; ++c)
                row[c] = encoded.at(src, c);
            data.add_row(row, static_cast<int>(rng.next_below(2)));
        }
        ClassifierModel model = train_gradient_boosting(data, {});

        BenchResult r;
        double t = now_ms();
        auto a = score_candidates(model, encoded, ExecMode::Serial);
        r.serial_ms = now_ms() - t;
        t = now_ms();
        auto b = score_candidates(model, encoded, ExecMode::OpenMp);
        r.openmp_ms = now_ms() - t;
        r.identical = a == b;
        print_row("score_candidates (gb)", r);
    }

    // full selection run (per-group training in parallel)
    {
        ExperimentDatabase db = build_experiment_database(profile, 600, 19400, 50,
                                                          {10, 64, ExecMode::OpenMp});
        ExperimentConfig cfg;
        cfg.classifier = default_classifier_spec(ClassifierKind::Gb);
        cfg.seed = 1;

        BenchResult r;
        cfg.exec = ExecMode::Serial;
        double t = now_ms();
        RunRecord a = run_cds(db, profile, cfg);
        r.serial_ms = now_ms() - t;
        cfg.exec = ExecMode::OpenMp;
        t = now_ms();
        RunRecord b = run_cds(db, profile, cfg);
        r.openmp_ms = now_ms() - t;
        r.identical = a.serialize_canonical() == b.serialize_canonical();
        print_row("run_cds (gb, mini-rspu)", r);
    }

    return 0;
}
