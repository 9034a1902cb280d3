#include <algorithm>
#include <sstream>

#include "covsel/dut.hpp"
#include "covsel/errors.hpp"
#include "covsel/rng.hpp"
#include "covsel/stimulus.hpp"
#include "covsel/text_util.hpp"

namespace covsel {

namespace {

struct Interval {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    bool empty() const { return lo > hi; }
};

Interval full_domain(const ConfigField& f) {
    switch (f.kind) {
    case FieldKind::Binary: return {0, 1};
    case FieldKind::Enum: return {0, f.values.size() - 1};
    case FieldKind::Wide32: return {0, 0xffffffffull};
    }
    return {1, 0};
}

Interval encoded_to_interval(const ConfigField& f, std::uint16_t encoded) {
    if (f.kind == FieldKind::Wide32) {
        auto [lo, hi] = bucket_range(encoded);
        return {lo, hi};
    }
    return {encoded, encoded};
}

Interval atom_to_interval(const GateAtom& a) {
    switch (a.op) {
    case GateOp::Eq: return {a.value, a.value};
    case GateOp::Ge: return {a.value, 0xffffffffull};
    case GateOp::Le: return {0, a.value};
    }
    return {1, 0};
}

// Working pin set for targeted test construction. Pins narrow per-field
// intervals; a pin attempt either commits or leaves the set untouched.
class PinSet {
public:
    explicit PinSet(const DutProfile& profile) : profile_(&profile) {
        pins_.reserve(profile.field_count());
        for (const auto& f : profile.fields())
            pins_.push_back(full_domain(f));
    }

    bool try_pin_point(const CoveragePoint& point, const std::optional<Gate>& gate) {
        std::vector<Interval> next = pins_;
        for (auto [field, encoded] : point.predicate) {
            next[field] = intersect(next[field], encoded_to_interval(profile_->fields()[field], encoded));
            if (next[field].empty())
                return false;
        }
        if (gate)
            for (const auto& a : gate->atoms) {
                next[a.field] = intersect(next[a.field], atom_to_interval(a));
                if (next[a.field].empty())
                    return false;
            }
        pins_ = std::move(next);
        return true;
    }

    // Unpinned fields are drawn from the neutral spec so that targeted tests
    // still look like ordinary stimuli away from the target.
    TestVector materialize(const ConstraintSpec& neutral, Rng& rng) const {
        TestVector test(pins_.size());
        for (std::size_t i = 0; i < pins_.size(); ++i) {
            Interval dom = full_domain(profile_->fields()[i]);
            if (pins_[i].lo == dom.lo && pins_[i].hi == dom.hi)
                test[i] = neutral.draw_field(static_cast<std::uint16_t>(i), rng);
            else
                test[i] = static_cast<std::uint32_t>(rng.next_in(pins_[i].lo, pins_[i].hi));
        }
        return test;
    }

private:
    static Interval intersect(Interval a, Interval b) {
        return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
    }
    const DutProfile* profile_;
    std::vector<Interval> pins_;
};

ConstraintSpec neutral_spec(const DutProfile& profile) {
    ConstraintSpec spec(profile);
    for (std::size_t i = 0; i < profile.field_count(); ++i)
        if (profile.fields()[i].kind == FieldKind::Wide32)
            spec.set(static_cast<std::uint16_t>(i), dist::LogRange{});
    return spec;
}

bool satisfies_any_gate(const DutProfile& profile, const TestVector& test) {
    for (std::uint32_t g = 0; g < profile.model().group_count(); ++g)
        if (profile.gate(g) && profile.gate_satisfied(g, test))
            return true;
    return false;
}

} // namespace

ExperimentDatabase build_experiment_database(const DutProfile& profile,
                                             std::uint32_t golden_count,
                                             std::uint32_t filler_count,
                                             std::uint64_t seed,
                                             const BuildOptions& opts) {
    if (golden_count == 0 || filler_count == 0)
        throw Error("golden_count and filler_count must be positive");

    const auto& model = profile.model();
    ConstraintSpec neutral = neutral_spec(profile);

    Rng golden_rng(derive_seed(seed, {1}));
    Rng filler_rng(derive_seed(seed, {2}));
    Rng shuffle_rng(derive_seed(seed, {3}));

    // Targeted golden construction: repeatedly aim at the group with the most
    // uncovered reachable points, pin one of its points plus compatible
    // uncovered points of other groups, and fill the rest at random.
    std::vector<char> covered(model.point_count(), 0);
    std::vector<std::uint32_t> group_uncovered(model.group_count(), 0);
    std::size_t remaining = 0;
    for (const auto& p : model.points())
        if (model.reachable(p.id)) {
            ++group_uncovered[p.group_id];
            ++remaining;
        }

    auto mark_hits = [&](const std::vector<std::uint32_t>& hits) {
        for (std::uint32_t pid : hits)
            if (!covered[pid] && model.reachable(pid)) {
                covered[pid] = 1;
                --group_uncovered[model.points()[pid].group_id];
                --remaining;
            }
    };

    std::vector<TestVector> golden;
    golden.reserve(golden_count);
    while (remaining > 0) {
        if (golden.size() >= golden_count)
            throw GoldenConstructionFailed("golden budget of " + std::to_string(golden_count) +
                                           " tests exhausted with " + std::to_string(remaining) +
                                           " reachable points uncovered");
        std::uint32_t target_group = 0;
        for (std::uint32_t g = 0; g < model.group_count(); ++g)
            if (group_uncovered[g] > group_uncovered[target_group])
                target_group = g;

        std::uint32_t target_point = 0xffffffffu;
        for (std::uint32_t pid : model.groups()[target_group].point_ids)
            if (!covered[pid] && model.reachable(pid)) {
                target_point = pid;
                break;
            }

        bool hit_target = false;
        for (std::uint32_t attempt = 0; attempt < opts.retry_budget && !hit_target; ++attempt) {
            PinSet pins(profile);
            if (!pins.try_pin_point(model.points()[target_point], profile.gate(target_group)))
                break; // unsatisfiable: reachability analysis disagrees with reality
            // Piggyback uncovered points of other groups where consistent.
            for (std::uint32_t g = 0; g < model.group_count(); ++g) {
                if (g == target_group || group_uncovered[g] == 0)
                    continue;
                for (std::uint32_t pid : model.groups()[g].point_ids)
                    if (!covered[pid] && model.reachable(pid) &&
                        pins.try_pin_point(model.points()[pid], profile.gate(g)))
                        break;
            }
            TestVector test = pins.materialize(neutral, golden_rng);
            auto hits = simulate(profile, test);
            if (std::binary_search(hits.begin(), hits.end(), target_point)) {
                mark_hits(hits);
                golden.push_back(std::move(test));
                hit_target = true;
            }
        }
        if (!hit_target)
            throw GoldenConstructionFailed("could not construct a test hitting point " +
                                           std::to_string(target_point) +
                                           "; the point may be misclassified as reachable");
    }

    // Pad to golden_count with extra targeted tests aimed at ungated points,
    // keeping hard gated points rare in the pool.
    std::vector<std::uint32_t> pad_pool;
    for (const auto& p : model.points())
        if (model.reachable(p.id) && !profile.gate(p.group_id))
            pad_pool.push_back(p.id);
    if (pad_pool.empty())
        for (const auto& p : model.points())
            if (model.reachable(p.id))
                pad_pool.push_back(p.id);
    while (golden.size() < golden_count) {
        std::uint32_t pid = pad_pool[golden_rng.next_below(pad_pool.size())];
        PinSet pins(profile);
        if (!pins.try_pin_point(model.points()[pid], profile.gate(model.points()[pid].group_id)))
            continue;
        golden.push_back(pins.materialize(neutral, golden_rng));
    }

    // Filler: broadly constrained-random, with draws that satisfy any gate
    // kept only 1-in-gate_downweight times.
    std::vector<TestVector> filler;
    filler.reserve(filler_count);
    while (filler.size() < filler_count) {
        TestVector test = neutral.draw(filler_rng);
        if (opts.gate_downweight > 1 && satisfies_any_gate(profile, test) &&
            filler_rng.next_below(opts.gate_downweight) != 0)
            continue;
        filler.push_back(std::move(test));
    }

    // Interleave golden and filler so that test id carries no information
    // about test quality.
    std::size_t total = golden.size() + filler.size();
    std::vector<std::uint32_t> order(total);
    for (std::size_t i = 0; i < total; ++i)
        order[i] = static_cast<std::uint32_t>(i);
    shuffle_rng.shuffle(order);

    ExperimentDatabase db;
    db.seed = seed;
    db.golden_count = golden_count;
    db.filler_count = filler_count;
    db.tests.resize(total);
    for (std::size_t new_id = 0; new_id < total; ++new_id) {
        std::uint32_t src = order[new_id];
        if (src < golden.size()) {
            db.tests[new_id] = std::move(golden[src]);
            db.golden_ids.push_back(static_cast<std::uint32_t>(new_id));
        } else {
            db.tests[new_id] = std::move(filler[src - golden.size()]);
        }
    }
    db.precomputed_hits = simulate_all(profile, db.tests, opts.exec);
    return db;
}

void save_database(const ExperimentDatabase& db, const DutProfile& profile, const std::string& path) {
    std::ostringstream out;
    out << header_line("db");
    out << "meta seed " << db.seed << " golden " << db.golden_count << " filler " << db.filler_count
        << '\n';
    out << "golden_ids";
    for (std::size_t i = 0; i < db.golden_ids.size(); ++i)
        out << (i ? "," : " ") << db.golden_ids[i];
    out << '\n';
    const auto& fields = profile.fields();
    for (std::size_t t = 0; t < db.tests.size(); ++t) {
        out << "test " << t << ':';
        for (std::size_t i = 0; i < fields.size(); ++i) {
            out << (i ? "," : " ") << fields[i].name << '=';
            if (fields[i].kind == FieldKind::Enum)
                out << fields[i].values[db.tests[t][i]];
            else
                out << db.tests[t][i];
        }
        out << '\n';
    }
    for (std::size_t t = 0; t < db.precomputed_hits.size(); ++t) {
        out << "hits " << t << ':';
        const auto& hits = db.precomputed_hits[t];
        for (std::size_t j = 0; j < hits.size(); ++j)
            out << (j ? "," : " ") << hits[j];
        out << '\n';
    }
    write_file(path, out.str());
}

ExperimentDatabase load_database(const std::string& path, const DutProfile& profile, bool verify,
                                 ExecMode mode) {
    auto lines = read_lines(path);
    expect_header(lines, "db");

    ExperimentDatabase db;
    bool saw_meta = false;
    std::size_t test_lines = 0, hit_lines = 0;
    const auto& fields = profile.fields();

    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::size_t ln = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line[0] == '#')
            continue;
        auto sp = line.find(' ');
        if (sp == std::string_view::npos)
            throw ParseError("malformed line", ln);
        std::string_view kind = line.substr(0, sp);
        std::string_view rest = trim(line.substr(sp + 1));

        if (kind == "meta") {
            auto toks = tokenize(rest);
            if (toks.size() != 6 || toks[0] != "seed" || toks[2] != "golden" || toks[4] != "filler")
                throw ParseError("malformed meta line", ln);
            db.seed = parse_u64(toks[1], ln);
            db.golden_count = static_cast<std::uint32_t>(parse_u64(toks[3], ln));
            db.filler_count = static_cast<std::uint32_t>(parse_u64(toks[5], ln));
            db.tests.reserve(db.golden_count + db.filler_count);
            saw_meta = true;
        } else if (kind == "golden_ids") {
            for (auto tok : split_view(rest, ','))
                db.golden_ids.push_back(static_cast<std::uint32_t>(parse_u64(trim(tok), ln)));
        } else if (kind == "test") {
            auto colon = rest.find(':');
            if (colon == std::string_view::npos)
                throw ParseError("test line missing ':'", ln);
            std::uint64_t id = parse_u64(trim(rest.substr(0, colon)), ln);
            if (id != test_lines)
                throw ParseError("test ids must be contiguous", ln);
            TestVector test(fields.size());
            std::vector<char> assigned(fields.size(), 0);
            for (auto term : split_view(trim(rest.substr(colon + 1)), ',')) {
                term = trim(term);
                auto eq = term.find('=');
                if (eq == std::string_view::npos)
                    throw ParseError("bad assignment '" + std::string(term) + "'", ln);
                std::uint16_t fi = profile.field_index(std::string(term.substr(0, eq)));
                std::string_view val = term.substr(eq + 1);
                if (fields[fi].kind == FieldKind::Enum) {
                    bool found = false;
                    for (std::size_t v = 0; v < fields[fi].values.size(); ++v)
                        if (fields[fi].values[v] == val) {
                            test[fi] = static_cast<std::uint32_t>(v);
                            found = true;
                            break;
                        }
                    if (!found)
                        throw ParseError("unknown enum value '" + std::string(val) + "'", ln);
                } else {
                    test[fi] = static_cast<std::uint32_t>(parse_u64(val, ln));
                }
                assigned[fi] = 1;
            }
            for (std::size_t f = 0; f < fields.size(); ++f)
                if (!assigned[f])
                    throw ParseError("field '" + fields[f].name + "' unassigned", ln);
            db.tests.push_back(std::move(test));
            ++test_lines;
        } else if (kind == "hits") {
            auto colon = rest.find(':');
            if (colon == std::string_view::npos)
                throw ParseError("hits line missing ':'", ln);
            std::uint64_t id = parse_u64(trim(rest.substr(0, colon)), ln);
            if (id != hit_lines)
                throw ParseError("hits ids must be contiguous", ln);
            std::vector<std::uint32_t> hits;
            std::string_view list = trim(rest.substr(colon + 1));
            if (!list.empty())
                for (auto tok : split_view(list, ','))
                    hits.push_back(static_cast<std::uint32_t>(parse_u64(trim(tok), ln)));
            db.precomputed_hits.push_back(std::move(hits));
            ++hit_lines;
        } else {
            throw ParseError("unknown record '" + std::string(kind) + "'", ln);
        }
    }

    if (!saw_meta)
        throw ParseError("missing meta record");
    if (test_lines != db.golden_count + db.filler_count)
        throw ParseError("expected " + std::to_string(db.golden_count + db.filler_count) +
                         " tests, found " + std::to_string(test_lines));
    if (hit_lines != test_lines)
        throw ParseError("expected one hits record per test, found " + std::to_string(hit_lines));

    if (verify)
        verify_database(db, profile, 0, 1, mode);
    return db;
}

void verify_database(const ExperimentDatabase& db, const DutProfile& profile,
                     std::size_t sample_count, std::uint64_t seed, ExecMode mode) {
    std::vector<std::uint32_t> ids;
    if (sample_count == 0 || sample_count >= db.size()) {
        ids.resize(db.size());
        for (std::size_t i = 0; i < db.size(); ++i)
            ids[i] = static_cast<std::uint32_t>(i);
    } else {
        Rng rng(derive_seed(seed, {0x7e57}));
        for (std::size_t s : rng.sample_without_replacement(db.size(), sample_count))
            ids.push_back(static_cast<std::uint32_t>(s));
    }

    std::vector<char> ok(ids.size(), 1);
    parallel_for(ids.size(), mode, [&](std::size_t i) {
        ok[i] = simulate(profile, db.tests[ids[i]]) == db.precomputed_hits[ids[i]];
    });
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!ok[i])
            throw ConsistencyError("stored hits for test " + std::to_string(ids[i]) +
                                   " disagree with re-simulation");
}

} // namespace covsel
