// covsel: coverage-directed test selection over a pre-simulated stimulus pool.
//
// Subcommands: gen-db, gen, verify-db, run, compare, extract, report.
// Exit codes: 0 success, 2 input/validation error, 3 database construction
// failure, 4 pool exhausted before the lowest checkpoint.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "covsel/builtin_profiles.hpp"
#include "covsel/engine.hpp"
#include "covsel/text_util.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using namespace covsel;

namespace {

struct CommonOpts {
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    std::string exec = "openmp";
    int verbosity = 0;

    ExecMode exec_mode() const {
        if (exec == "serial")
            return ExecMode::Serial;
        if (exec == "openmp")
            return ExecMode::OpenMp;
        throw Error("--exec must be 'serial' or 'openmp'");
    }
};

std::string default_out_dir() {
    if (const char* env = std::getenv("COVSEL_OUT"))
        return env;
    return ".";
}

fs::path ensure_out_dir(const std::string& dir) {
    fs::path p(dir);
    if (!p.empty())
        fs::create_directories(p);
    return p;
}

json load_json(const std::string& path) {
    std::string text = read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw ParseError("invalid JSON in " + path);
    return j;
}

ClassifierSpec classifier_from_json(const std::string& name, const json& params) {
    ClassifierSpec spec = default_classifier_spec(classifier_kind_from_name(name));
    if (params.is_null())
        return spec;
    switch (spec.kind) {
    case ClassifierKind::Dt:
    case ClassifierKind::Dcdt:
    case ClassifierKind::Dcrdt:
        if (params.contains("max_depth")) {
            if (params["max_depth"].is_null())
                spec.cart.max_depth.reset();
            else
                spec.cart.max_depth = params["max_depth"].get<std::size_t>();
        }
        if (params.contains("min_samples_split"))
            spec.cart.min_samples_split = params["min_samples_split"].get<std::size_t>();
        if (params.contains("splitter"))
            spec.cart.splitter =
                params["splitter"].get<std::string>() == "random" ? Splitter::Random : Splitter::Best;
        break;
    case ClassifierKind::Rf:
        if (params.contains("n_trees"))
            spec.forest.n_trees = params["n_trees"].get<std::size_t>();
        if (params.contains("max_depth") && !params["max_depth"].is_null())
            spec.forest.max_depth = params["max_depth"].get<std::size_t>();
        if (params.contains("features_per_split"))
            spec.forest.features_per_split = params["features_per_split"].get<std::size_t>();
        if (params.contains("bootstrap"))
            spec.forest.bootstrap = params["bootstrap"].get<bool>();
        break;
    case ClassifierKind::Gb:
        if (params.contains("n_stages"))
            spec.gb.n_stages = params["n_stages"].get<std::size_t>();
        if (params.contains("learning_rate"))
            spec.gb.learning_rate = params["learning_rate"].get<double>();
        if (params.contains("max_depth"))
            spec.gb.max_depth = params["max_depth"].get<std::size_t>();
        break;
    case ClassifierKind::Lr:
        if (params.contains("epochs"))
            spec.lr.epochs = params["epochs"].get<std::size_t>();
        if (params.contains("step_size"))
            spec.lr.step_size = params["step_size"].get<double>();
        if (params.contains("l2"))
            spec.lr.l2 = params["l2"].get<double>();
        break;
    case ClassifierKind::Nb:
        if (params.contains("laplace_alpha"))
            spec.nb.laplace_alpha = params["laplace_alpha"].get<double>();
        break;
    case ClassifierKind::Nn:
        if (params.contains("hidden")) {
            auto h = params["hidden"].get<std::vector<std::size_t>>();
            if (h.size() != 3)
                throw Error("nn hidden sizes must list exactly 3 layers");
            spec.mlp.hidden = {h[0], h[1], h[2]};
        }
        if (params.contains("epochs"))
            spec.mlp.epochs = params["epochs"].get<std::size_t>();
        if (params.contains("step_size"))
            spec.mlp.step_size = params["step_size"].get<double>();
        if (params.contains("batch_size"))
            spec.mlp.batch_size = params["batch_size"].get<std::size_t>();
        break;
    case ClassifierKind::Dummy:
        break;
    }
    return spec;
}

struct LoadedExperiment {
    DutProfile profile;
    ExperimentDatabase db;
    ExperimentConfig config;
    std::vector<ClassifierKind> roster; // compare only
    std::vector<std::uint64_t> seeds;   // compare only
};

LoadedExperiment load_experiment(const std::string& config_path, const CommonOpts& opts) {
    json j = load_json(config_path);
    if (!j.contains("database") || !j.contains("profile"))
        throw Error("config must name 'database' and 'profile' files");

    DutProfile profile = DutProfile::load(j["profile"].get<std::string>());
    ExperimentDatabase db = load_database(j["database"].get<std::string>(), profile, false);

    ExperimentConfig cfg;
    if (j.contains("mode"))
        cfg.mode = j["mode"].get<std::string>() == "random" ? SelectionMode::Random : SelectionMode::Cds;
    std::string classifier = j.value("classifier", std::string("gb"));
    cfg.classifier = classifier_from_json(classifier, j.contains("classifier_params")
                                                          ? j["classifier_params"]
                                                          : json());
    cfg.warmup_batch = j.value("warmup_batch", 1000u);
    cfg.cds_trigger = j.value("cds_trigger", 0.90);
    cfg.min_support = j.value("min_support", 10u);
    if (j.contains("checkpoints"))
        cfg.checkpoints = j["checkpoints"].get<std::vector<double>>();
    if (j.contains("stop_coverage"))
        cfg.stop_coverage = j["stop_coverage"].get<double>();
    cfg.reachable_basis = j.value("coverage_basis", std::string("reachable")) != "all";
    cfg.seed = j.value("seed", 1u);
    if (opts.seed_override)
        cfg.seed = *opts.seed_override;
    cfg.exec = opts.exec_mode();
    cfg.validate();

    LoadedExperiment out{std::move(profile), std::move(db), std::move(cfg), {}, {}};
    if (j.contains("classifiers"))
        for (const auto& name : j["classifiers"])
            out.roster.push_back(classifier_kind_from_name(name.get<std::string>()));
    if (j.contains("seeds"))
        out.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (out.seeds.empty())
        out.seeds.push_back(out.config.seed);
    return out;
}

std::string classifier_echo(const ClassifierSpec& spec) {
    std::ostringstream out;
    out << classifier_config_name(spec.kind);
    switch (spec.kind) {
    case ClassifierKind::Dummy:
        break;
    case ClassifierKind::Dt:
    case ClassifierKind::Dcdt:
    case ClassifierKind::Dcrdt:
        out << "{depth=";
        if (spec.cart.max_depth)
            out << *spec.cart.max_depth;
        else
            out << "none";
        out << ",splitter=" << (spec.cart.splitter == Splitter::Best ? "best" : "random")
            << ",min_split=" << spec.cart.min_samples_split << '}';
        break;
    case ClassifierKind::Rf:
        out << "{trees=" << spec.forest.n_trees << ",mtry=";
        if (spec.forest.features_per_split)
            out << *spec.forest.features_per_split;
        else
            out << "sqrt";
        out << ",bootstrap=" << (spec.forest.bootstrap ? 1 : 0) << '}';
        break;
    case ClassifierKind::Gb:
        out << "{stages=" << spec.gb.n_stages << ",rate=" << format_double(spec.gb.learning_rate)
            << ",depth=" << spec.gb.max_depth << '}';
        break;
    case ClassifierKind::Lr:
        out << "{epochs=" << spec.lr.epochs << ",step=" << format_double(spec.lr.step_size)
            << ",l2=" << format_double(spec.lr.l2) << '}';
        break;
    case ClassifierKind::Nn:
        out << "{hidden=" << spec.mlp.hidden[0] << '/' << spec.mlp.hidden[1] << '/'
            << spec.mlp.hidden[2] << ",epochs=" << spec.mlp.epochs
            << ",step=" << format_double(spec.mlp.step_size) << ",batch=" << spec.mlp.batch_size
            << '}';
        break;
    case ClassifierKind::Nb:
        out << "{alpha=" << format_double(spec.nb.laplace_alpha) << '}';
        break;
    }
    return out.str();
}

std::string config_echo(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "mode=" << (cfg.mode == SelectionMode::Random ? "random" : "cds")
        << " classifier=" << classifier_echo(cfg.classifier)
        << " warmup_batch=" << cfg.warmup_batch << " cds_trigger=" << format_double(cfg.cds_trigger)
        << " min_support=" << cfg.min_support << " checkpoints=";
    for (std::size_t i = 0; i < cfg.checkpoints.size(); ++i)
        out << (i ? "," : "") << format_double(cfg.checkpoints[i]);
    out << " stop=" << format_double(cfg.effective_stop())
        << " basis=" << (cfg.reachable_basis ? "reachable" : "all") << " seed=" << cfg.seed;
    return out.str();
}

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
    return buf;
}

void write_run_outputs(const RunRecord& rec, const ExperimentConfig& cfg, const fs::path& out_dir,
                       const std::string& stem) {
    write_file((out_dir / (stem + ".run")).string(), rec.serialize_canonical());
    write_file((out_dir / (stem + ".curve.tsv")).string(), rec.curve_data());

    std::size_t warmup_sims = 0, cds_model = 0, cds_batch = 0;
    for (const auto& e : rec.log) {
        if (e.phase == Phase::Warmup)
            ++warmup_sims;
        else if (e.selection == SelectionKind::Model)
            ++cds_model;
        else
            ++cds_batch;
    }
    double mean_train = rec.iteration_train_ms.empty()
                            ? 0.0
                            : rec.train_ms_total / static_cast<double>(rec.iteration_train_ms.size());

    std::ostringstream s;
    // Timing and timestamp live on this single header line; everything below
    // it is reproducible bit-for-bit from (inputs, seed).
    s << "# covsel-summary generated=" << timestamp_now()
      << " wall_warmup_ms=" << format_double(rec.wall_ms_warmup)
      << " wall_cds_ms=" << format_double(rec.wall_ms_cds)
      << " train_ms=" << format_double(rec.train_ms_total)
      << " mean_iteration_train_ms=" << format_double(mean_train) << '\n';
    s << "config " << config_echo(cfg) << '\n';
    s << "simulations " << rec.log.size() << '\n';
    s << "warmup_simulations " << warmup_sims << '\n';
    s << "cds_model_simulations " << cds_model << '\n';
    s << "cds_batch_simulations " << cds_batch << '\n';
    s << "final_coverage " << format_double(rec.final_coverage) << '\n';
    s << "exhausted " << (rec.exhausted ? 1 : 0) << '\n';
    for (const auto& c : rec.checkpoints) {
        s << "checkpoint " << format_double(c.level) << ' ';
        if (c.tests)
            s << *c.tests;
        else
            s << '-';
        s << '\n';
    }
    write_file((out_dir / (stem + ".summary.txt")).string(), s.str());
}

void print_checkpoints(const RunRecord& rec) {
    for (const auto& c : rec.checkpoints) {
        std::cout << "  coverage " << format_double(c.level) << ": ";
        if (c.tests)
            std::cout << *c.tests << " tests\n";
        else
            std::cout << "not reached\n";
    }
}

int cmd_gen_db(const std::string& profile_path, const std::string& builtin, std::uint32_t golden,
               std::uint32_t filler, std::uint64_t seed, std::uint32_t downweight,
               const CommonOpts& opts) {
    fs::path out_dir = ensure_out_dir(opts.out_dir);

    std::optional<DutProfile> profile;
    if (!builtin.empty()) {
        profile = make_builtin_profile(builtin);
        if (!profile)
            throw Error("unknown builtin profile '" + builtin + "'");
        auto defaults = builtin_db_defaults(builtin);
        if (golden == 0)
            golden = defaults.golden;
        if (filler == 0)
            filler = defaults.filler;
        profile->save((out_dir / "profile.txt").string());
        std::cout << "profile: " << (out_dir / "profile.txt").string() << '\n';
    } else {
        profile = DutProfile::load(profile_path);
        if (golden == 0 || filler == 0)
            throw Error("--golden and --filler are required with --profile");
    }

    BuildOptions bopts;
    bopts.gate_downweight = downweight;
    bopts.exec = opts.exec_mode();
    ExperimentDatabase db = build_experiment_database(*profile, golden, filler, seed, bopts);
    save_database(db, *profile, (out_dir / "database.txt").string());

    const auto& model = profile->model();
    std::size_t reachable = model.reachable_count();
    std::cout << "database: " << (out_dir / "database.txt").string() << '\n';
    std::cout << "tests: " << db.size() << " (golden " << golden << ", filler " << filler << ")\n";
    std::cout << "points: " << model.point_count() << ", reachable: " << reachable << " ("
              << format_double(static_cast<double>(reachable) /
                               static_cast<double>(model.point_count()))
              << ")\n";
    std::cout << "groups: " << model.group_count() << '\n';
    return 0;
}

int cmd_verify_db(const std::string& db_path, const std::string& profile_path, std::size_t sample,
                  std::uint64_t seed, const CommonOpts& opts) {
    DutProfile profile = DutProfile::load(profile_path);
    ExperimentDatabase db = load_database(db_path, profile, false);
    verify_database(db, profile, sample, seed, opts.exec_mode());
    std::cout << "verified " << (sample == 0 ? db.size() : std::min(sample, db.size()))
              << " tests against re-simulation: ok\n";
    return 0;
}

int run_exit_code(const RunRecord& rec, const ExperimentConfig& cfg) {
    if (!rec.exhausted || cfg.checkpoints.empty())
        return 0;
    return rec.tests_to(cfg.checkpoints.front()) ? 0 : 4;
}

int cmd_run(const std::string& config_path, const CommonOpts& opts) {
    LoadedExperiment exp = load_experiment(config_path, opts);
    fs::path out_dir = ensure_out_dir(opts.out_dir);

    RunRecord rec = exp.config.mode == SelectionMode::Random
                        ? run_random_baseline(exp.db, exp.profile, exp.config)
                        : run_cds(exp.db, exp.profile, exp.config);

    write_run_outputs(rec, exp.config, out_dir, "run");
    std::cout << "simulations: " << rec.log.size() << ", final coverage "
              << format_double(rec.final_coverage) << (rec.exhausted ? " (pool exhausted)" : "")
              << '\n';
    print_checkpoints(rec);
    if (opts.verbosity > 0)
        for (std::size_t i = 0; i < rec.iteration_train_ms.size(); ++i)
            std::cout << "  iteration " << i << " training " << format_double(rec.iteration_train_ms[i])
                      << " ms\n";
    std::cout << "wrote " << (out_dir / "run.run").string() << '\n';
    return run_exit_code(rec, exp.config);
}

int cmd_compare(const std::string& config_path, const CommonOpts& opts) {
    LoadedExperiment exp = load_experiment(config_path, opts);
    if (exp.roster.empty())
        throw Error("compare config must list 'classifiers'");
    fs::path out_dir = ensure_out_dir(opts.out_dir);

    ComparisonReport report =
        compare_classifiers(exp.db, exp.profile, exp.config, exp.roster, exp.seeds);
    std::string text = report.to_aligned_text();
    write_file((out_dir / "report.txt").string(), text);
    write_file((out_dir / "report.tsv").string(), report.to_tsv());
    std::cout << text;

    bool any_ok = false;
    for (const auto& row : report.cells)
        for (const auto& cell : row)
            any_ok = any_ok || cell.mean_tests.has_value();
    return any_ok ? 0 : 2;
}

int cmd_extract(const std::string& db_path, const std::string& profile_path,
                const std::string& run_path, const std::string& group, std::size_t depth,
                std::uint64_t seed, std::uint64_t min_support, const std::string& out_file,
                const CommonOpts& opts) {
    DutProfile profile = DutProfile::load(profile_path);
    ExperimentDatabase db = load_database(db_path, profile, false);
    RunRecord rec = RunRecord::load(run_path);

    std::uint32_t group_id;
    try {
        group_id = static_cast<std::uint32_t>(parse_u64(group));
        if (group_id >= profile.model().group_count())
            throw Error("group id out of range");
    } catch (const ParseError&) {
        group_id = profile.model().group_by_name(group).group_id;
    }

    // Replay the run's simulations to reconstruct the coverage state the
    // selection loop saw.
    HitDatabase hitdb(profile.model());
    for (const auto& e : rec.log) {
        if (e.test_id >= db.size())
            throw Error("run record references test beyond the database");
        hitdb.record_simulation(e.test_id, db.precomputed_hits[e.test_id]);
    }

    auto [positives, negatives] = label_tests(hitdb, group_id);
    EncodedMatrix encoded = encode_batch(profile, db.tests, opts.exec_mode());

    GroupTrainingSet ts;
    try {
        ts = build_training_set(group_id, positives, negatives, encoded,
                                encoded_cardinalities(profile), min_support,
                                derive_seed(seed, {0xe4a}));
    } catch (const InsufficientSupport& e) {
        std::cout << "warning: " << e.what() << '\n';
        return 0;
    }

    CartParams params;
    params.max_depth = depth;
    params.seed = seed;
    auto tree = train_cart(ts.dataset, params);

    try {
        ExtractedConstraint c = extract_constraints(*tree, profile, group_id);
        std::string report = constraint_report(c, profile);
        std::cout << report;
        if (!out_file.empty())
            write_file(out_file, report);
    } catch (const NoPositiveLeaves& e) {
        std::cout << "warning: " << e.what() << '\n';
    }
    return 0;
}

int cmd_gen(const std::string& profile_path, const std::string& spec_path, std::size_t count,
            std::uint64_t seed, const CommonOpts& opts) {
    DutProfile profile = DutProfile::load(profile_path);
    ConstraintSpec spec = spec_path.empty() ? ConstraintSpec(profile)
                                            : ConstraintSpec::load(spec_path, profile);
    auto tests = generate_tests(profile, spec, count, seed);

    fs::path out_dir = ensure_out_dir(opts.out_dir);
    std::ostringstream out;
    out << header_line("tests");
    const auto& fields = profile.fields();
    for (std::size_t t = 0; t < tests.size(); ++t) {
        out << "test " << t << ':';
        for (std::size_t i = 0; i < fields.size(); ++i) {
            out << (i ? "," : " ") << fields[i].name << '=';
            if (fields[i].kind == FieldKind::Enum)
                out << fields[i].values[tests[t][i]];
            else
                out << tests[t][i];
        }
        out << '\n';
    }
    write_file((out_dir / "tests.txt").string(), out.str());
    std::cout << "wrote " << count << " tests to " << (out_dir / "tests.txt").string() << '\n';
    return 0;
}

int cmd_report(const std::string& run_path, const CommonOpts& opts) {
    RunRecord rec = RunRecord::load(run_path);
    fs::path out_dir = ensure_out_dir(opts.out_dir);
    write_file((out_dir / "curve.tsv").string(), rec.curve_data());
    std::cout << "simulations: " << rec.log.size() << ", final coverage "
              << format_double(rec.final_coverage) << '\n';
    print_checkpoints(rec);
    std::cout << "wrote " << (out_dir / "curve.tsv").string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coverage-directed test selection"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    CommonOpts opts;
    opts.out_dir = default_out_dir();
    app.add_option("--out", opts.out_dir, "output directory (env COVSEL_OUT)")->capture_default_str();
    std::uint64_t seed_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "seed override");
    app.add_option("--exec", opts.exec, "serial|openmp")->capture_default_str();
    app.add_flag("-v,--verbose", opts.verbosity, "verbose output");

    // gen-db
    auto* gen = app.add_subcommand("gen-db", "build an experiment database");
    std::string profile_path, builtin;
    std::uint32_t golden = 0, filler = 0, downweight = 10;
    std::uint64_t db_seed = 50;
    gen->add_option("--profile", profile_path, "profile file");
    gen->add_option("--builtin", builtin, "mini-radar | mini-rspu");
    gen->add_option("--golden", golden, "golden test count");
    gen->add_option("--filler", filler, "filler test count");
    gen->add_option("--db-seed", db_seed, "database seed")->capture_default_str();
    gen->add_option("--gate-downweight", downweight, "filler gate down-weighting")
        ->capture_default_str();

    // gen
    auto* genstim = app.add_subcommand("gen", "generate constrained-random tests");
    std::string g_profile, g_spec;
    std::size_t g_count = 100;
    std::uint64_t g_seed = 1;
    genstim->add_option("--profile", g_profile, "profile file")->required();
    genstim->add_option("--spec", g_spec, "constraint spec file (default uniform)");
    genstim->add_option("-n,--count", g_count, "number of tests")->capture_default_str();
    genstim->add_option("--gen-seed", g_seed, "generation seed")->capture_default_str();

    // verify-db
    auto* verify = app.add_subcommand("verify-db", "re-simulate stored tests and compare hits");
    std::string v_db, v_profile;
    std::size_t v_sample = 0;
    verify->add_option("--db", v_db, "database file")->required();
    verify->add_option("--profile", v_profile, "profile file")->required();
    verify->add_option("--sample", v_sample, "sample size (0 = all)")->capture_default_str();

    // run
    auto* run = app.add_subcommand("run", "run one selection experiment");
    std::string run_config;
    run->add_option("--config", run_config, "experiment config (json)")->required();

    // compare
    auto* compare = app.add_subcommand("compare", "compare classifiers over a shared seed set");
    std::string compare_config;
    compare->add_option("--config", compare_config, "comparison config (json)")->required();

    // extract
    auto* extract = app.add_subcommand("extract", "extract readable constraints for one group");
    std::string e_db, e_profile, e_run, e_group, e_out;
    std::size_t e_depth = 3;
    std::uint64_t e_min_support = 10;
    extract->add_option("--db", e_db, "database file")->required();
    extract->add_option("--profile", e_profile, "profile file")->required();
    extract->add_option("--run", e_run, "run record to replay")->required();
    extract->add_option("--group", e_group, "group name or id")->required();
    extract->add_option("--depth", e_depth, "tree depth")->capture_default_str();
    extract->add_option("--min-support", e_min_support, "minimum exercising tests")
        ->capture_default_str();
    extract->add_option("--to", e_out, "also write the report to this file");

    // report
    auto* report = app.add_subcommand("report", "re-emit tables and curve data from a run record");
    std::string r_run;
    report->add_option("--run", r_run, "run record")->required();

    CLI11_PARSE(app, argc, argv);
    if (!seed_opt->empty())
        opts.seed_override = seed_flag;

    try {
        if (gen->parsed()) {
            if (profile_path.empty() == builtin.empty())
                throw Error("gen-db needs exactly one of --profile or --builtin");
            return cmd_gen_db(profile_path, builtin, golden, filler, db_seed, downweight, opts);
        }
        if (genstim->parsed())
            return cmd_gen(g_profile, g_spec, g_count, opts.seed_override.value_or(g_seed), opts);
        if (verify->parsed())
            return cmd_verify_db(v_db, v_profile, v_sample, 1, opts);
        if (run->parsed())
            return cmd_run(run_config, opts);
        if (compare->parsed())
            return cmd_compare(compare_config, opts);
        if (extract->parsed())
            return cmd_extract(e_db, e_profile, e_run, e_group, e_depth,
                               opts.seed_override.value_or(1), e_min_support, e_out, opts);
        if (report->parsed())
            return cmd_report(r_run, opts);
    } catch (const GoldenConstructionFailed& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
