#include "covsel/dut.hpp"

#include <algorithm>
#include <sstream>

#include "covsel/errors.hpp"
#include "covsel/rng.hpp"
#include "covsel/text_util.hpp"

namespace covsel {

namespace {

// Feasible raw values for one field form an interval in raw space (enum
// ordinals, binary 0/1, wide 32-bit range). Predicates and gate atoms only
// ever pin exact values or one-sided bounds, so intervals are closed under
// the intersections we need.
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

Interval intersect(Interval a, Interval b) {
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

std::uint64_t key_of(const std::uint16_t* encoded_by_field, const std::vector<std::uint16_t>& fields) {
    std::uint64_t k = 0x243f6a8885a308d3ull;
    for (std::uint16_t f : fields)
        k = mix64(k ^ (static_cast<std::uint64_t>(f) << 32 | encoded_by_field[f]));
    return k;
}

} // namespace

DutProfile::DutProfile(std::string name, std::vector<ConfigField> fields,
                       std::vector<CoveragePoint> points, std::vector<CoverageGroup> groups,
                       std::vector<std::optional<Gate>> gates)
    : name_(std::move(name)), fields_(std::move(fields)), gates_(std::move(gates)) {
    if (fields_.empty())
        throw Error("profile declares no fields");
    for (const auto& f : fields_)
        if (f.kind == FieldKind::Enum && f.values.size() < 2)
            throw Error("enum field '" + f.name + "' needs at least two values");

    model_ = std::make_shared<CoverageModel>(std::move(points), std::move(groups));
    if (gates_.empty())
        gates_.resize(model_->group_count());
    if (gates_.size() != model_->group_count())
        throw Error("gate list size must match group count");

    for (const auto& p : model_->points())
        for (auto [field, encoded] : p.predicate) {
            if (field >= fields_.size())
                throw Error("point " + std::to_string(p.id) + " references unknown field");
            if (encoded >= fields_[field].encoded_cardinality())
                throw Error("point " + std::to_string(p.id) + " predicate value out of range");
        }
    for (const auto& g : gates_)
        if (g)
            for (const auto& a : g->atoms) {
                if (a.field >= fields_.size())
                    throw Error("gate references unknown field");
                if (!fields_[a.field].legal_raw(a.value) && a.op == GateOp::Eq)
                    throw Error("gate pins illegal value");
            }

    build_sim_index();
    compute_reachability();
}

std::uint16_t DutProfile::field_index(const std::string& name) const {
    for (std::size_t i = 0; i < fields_.size(); ++i)
        if (fields_[i].name == name)
            return static_cast<std::uint16_t>(i);
    throw Error("no field named '" + name + "'");
}

bool DutProfile::gate_satisfied(std::uint32_t group_id, const TestVector& raw) const {
    const auto& g = gates_[group_id];
    if (!g)
        return true;
    for (const auto& a : g->atoms) {
        std::uint32_t v = raw[a.field];
        switch (a.op) {
        case GateOp::Eq:
            if (v != a.value) return false;
            break;
        case GateOp::Ge:
            if (v < a.value) return false;
            break;
        case GateOp::Le:
            if (v > a.value) return false;
            break;
        }
    }
    return true;
}

void DutProfile::check_legal(const TestVector& test) const {
    if (test.size() != fields_.size())
        throw IllegalStimulus("stimulus has " + std::to_string(test.size()) + " fields, profile declares " +
                              std::to_string(fields_.size()));
    for (std::size_t i = 0; i < fields_.size(); ++i)
        if (!fields_[i].legal_raw(test[i]))
            throw IllegalStimulus("value " + std::to_string(test[i]) + " out of domain for field '" +
                                  fields_[i].name + "'");
}

void DutProfile::build_sim_index() {
    sim_index_.assign(model_->group_count(), {});
    for (const auto& p : model_->points()) {
        std::vector<std::uint16_t> fs;
        fs.reserve(p.predicate.size());
        for (auto [field, encoded] : p.predicate)
            fs.push_back(field);
        std::sort(fs.begin(), fs.end());

        auto& buckets = sim_index_[p.group_id];
        FieldSetBucket* bucket = nullptr;
        for (auto& b : buckets)
            if (b.fields == fs) {
                bucket = &b;
                break;
            }
        if (!bucket) {
            buckets.push_back(FieldSetBucket{fs, {}});
            bucket = &buckets.back();
        }

        std::vector<std::uint16_t> encoded_by_field(fields_.size(), 0);
        for (auto [field, encoded] : p.predicate)
            encoded_by_field[field] = encoded;
        bucket->by_key[key_of(encoded_by_field.data(), fs)].push_back(p.id);
    }
}

void DutProfile::compute_reachability() {
    std::vector<char> reachable(model_->point_count(), 1);
    for (const auto& p : model_->points()) {
        std::vector<Interval> pins(fields_.size());
        for (std::size_t i = 0; i < fields_.size(); ++i)
            pins[i] = full_domain(fields_[i]);
        for (auto [field, encoded] : p.predicate)
            pins[field] = intersect(pins[field], encoded_to_interval(fields_[field], encoded));
        if (const auto& g = gates_[p.group_id])
            for (const auto& a : g->atoms)
                pins[a.field] = intersect(pins[a.field], atom_to_interval(a));
        for (const auto& iv : pins)
            if (iv.empty()) {
                reachable[p.id] = 0;
                break;
            }
    }
    model_->set_reachability(std::move(reachable));
}

EncodedVector encode(const DutProfile& profile, const TestVector& test) {
    profile.check_legal(test);
    EncodedVector out(test.size());
    const auto& fields = profile.fields();
    for (std::size_t i = 0; i < test.size(); ++i)
        out[i] = fields[i].kind == FieldKind::Wide32 ? bucket_of(test[i])
                                                     : static_cast<std::uint16_t>(test[i]);
    return out;
}

std::vector<std::uint32_t> simulate(const DutProfile& profile, const TestVector& test) {
    profile.check_legal(test);
    EncodedVector encoded = encode(profile, test);

    std::vector<std::uint32_t> hits;
    const auto& model = profile.model();
    for (std::uint32_t g = 0; g < model.group_count(); ++g) {
        if (!profile.gate_satisfied(g, test))
            continue;
        for (const auto& bucket : profile.sim_index_[g]) {
            auto it = bucket.by_key.find(key_of(encoded.data(), bucket.fields));
            if (it == bucket.by_key.end())
                continue;
            for (std::uint32_t pid : it->second) {
                bool match = true;
                for (auto [field, want] : model.points()[pid].predicate)
                    if (encoded[field] != want) {
                        match = false;
                        break;
                    }
                if (match)
                    hits.push_back(pid);
            }
        }
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

std::vector<std::vector<std::uint32_t>> simulate_all(const DutProfile& profile,
                                                     const std::vector<TestVector>& tests,
                                                     ExecMode mode) {
    std::vector<std::vector<std::uint32_t>> out(tests.size());
    parallel_for(tests.size(), mode, [&](std::size_t i) { out[i] = simulate(profile, tests[i]); });
    return out;
}

// --- profile file format ---------------------------------------------------
//
//   # covsel-profile v1
//   profile <name>
//   field <name> binary
//   field <name> enum <sym> <sym> ...
//   field <name> wide32
//   group <name> [gate <field>=<sym> <field>>=<raw> <field><=<raw> ...]
//   point <id> <group> <field>=<encoded> ...

void DutProfile::save(const std::string& path) const {
    std::ostringstream out;
    out << header_line("profile");
    out << "profile " << name_ << '\n';
    for (const auto& f : fields_) {
        out << "field " << f.name << ' ';
        switch (f.kind) {
        case FieldKind::Binary: out << "binary"; break;
        case FieldKind::Wide32: out << "wide32"; break;
        case FieldKind::Enum:
            out << "enum";
            for (const auto& v : f.values)
                out << ' ' << v;
            break;
        }
        out << '\n';
    }
    for (const auto& g : model_->groups()) {
        out << "group " << g.name;
        if (const auto& gate = gates_[g.group_id]) {
            out << " gate";
            for (const auto& a : gate->atoms) {
                const auto& f = fields_[a.field];
                out << ' ' << f.name;
                switch (a.op) {
                case GateOp::Eq: out << '='; break;
                case GateOp::Ge: out << ">="; break;
                case GateOp::Le: out << "<="; break;
                }
                if (a.op == GateOp::Eq && f.kind == FieldKind::Enum)
                    out << f.values[a.value];
                else
                    out << a.value;
            }
        }
        out << '\n';
    }
    for (const auto& p : model_->points()) {
        out << "point " << p.id << ' ' << model_->groups()[p.group_id].name;
        for (auto [field, encoded] : p.predicate)
            out << ' ' << fields_[field].name << '=' << encoded;
        out << '\n';
    }
    write_file(path, out.str());
}

DutProfile DutProfile::load(const std::string& path) {
    auto lines = read_lines(path);
    expect_header(lines, "profile");

    std::string name = "unnamed";
    std::vector<ConfigField> fields;
    std::vector<CoverageGroup> groups;
    std::vector<std::optional<Gate>> gates;
    std::vector<CoveragePoint> points;

    auto field_idx = [&](std::string_view n, std::size_t ln) -> std::uint16_t {
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (fields[i].name == n)
                return static_cast<std::uint16_t>(i);
        throw ParseError("unknown field '" + std::string(n) + "'", ln);
    };
    auto group_idx = [&](std::string_view n, std::size_t ln) -> std::uint32_t {
        for (std::size_t i = 0; i < groups.size(); ++i)
            if (groups[i].name == n)
                return static_cast<std::uint32_t>(i);
        throw ParseError("unknown group '" + std::string(n) + "'", ln);
    };

    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::size_t ln = i + 1;
        auto toks = tokenize(lines[i]);
        if (toks.empty() || toks[0][0] == '#')
            continue;
        if (toks[0] == "profile") {
            if (toks.size() != 2)
                throw ParseError("profile line needs a name", ln);
            name = std::string(toks[1]);
        } else if (toks[0] == "field") {
            if (toks.size() < 3)
                throw ParseError("field line too short", ln);
            ConfigField f;
            f.name = std::string(toks[1]);
            if (toks[2] == "binary") {
                f.kind = FieldKind::Binary;
            } else if (toks[2] == "wide32") {
                f.kind = FieldKind::Wide32;
            } else if (toks[2] == "enum") {
                f.kind = FieldKind::Enum;
                for (std::size_t t = 3; t < toks.size(); ++t)
                    f.values.emplace_back(toks[t]);
                if (f.values.size() < 2)
                    throw ParseError("enum needs at least two values", ln);
            } else {
                throw ParseError("unknown field kind '" + std::string(toks[2]) + "'", ln);
            }
            fields.push_back(std::move(f));
        } else if (toks[0] == "group") {
            if (toks.size() < 2)
                throw ParseError("group line needs a name", ln);
            CoverageGroup g;
            g.group_id = static_cast<std::uint32_t>(groups.size());
            g.name = std::string(toks[1]);
            std::optional<Gate> gate;
            if (toks.size() > 2) {
                if (toks[2] != "gate")
                    throw ParseError("expected 'gate'", ln);
                gate = Gate{};
                for (std::size_t t = 3; t < toks.size(); ++t) {
                    std::string_view atom = toks[t];
                    GateAtom a;
                    std::size_t pos;
                    if ((pos = atom.find(">=")) != std::string_view::npos) {
                        a.op = GateOp::Ge;
                    } else if ((pos = atom.find("<=")) != std::string_view::npos) {
                        a.op = GateOp::Le;
                    } else if ((pos = atom.find('=')) != std::string_view::npos) {
                        a.op = GateOp::Eq;
                    } else {
                        throw ParseError("bad gate atom '" + std::string(atom) + "'", ln);
                    }
                    a.field = field_idx(atom.substr(0, pos), ln);
                    std::string_view val = atom.substr(pos + (a.op == GateOp::Eq ? 1 : 2));
                    const auto& f = fields[a.field];
                    if (a.op == GateOp::Eq && f.kind == FieldKind::Enum) {
                        bool found = false;
                        for (std::size_t v = 0; v < f.values.size(); ++v)
                            if (f.values[v] == val) {
                                a.value = static_cast<std::uint32_t>(v);
                                found = true;
                                break;
                            }
                        if (!found)
                            throw ParseError("unknown enum value '" + std::string(val) + "'", ln);
                    } else {
                        a.value = static_cast<std::uint32_t>(parse_u64(val, ln));
                    }
                    gate->atoms.push_back(a);
                }
            }
            groups.push_back(std::move(g));
            gates.push_back(std::move(gate));
        } else if (toks[0] == "point") {
            if (toks.size() < 4)
                throw ParseError("point line too short", ln);
            CoveragePoint p;
            p.id = static_cast<std::uint32_t>(parse_u64(toks[1], ln));
            p.group_id = group_idx(toks[2], ln);
            for (std::size_t t = 3; t < toks.size(); ++t) {
                auto eq = toks[t].find('=');
                if (eq == std::string_view::npos)
                    throw ParseError("bad predicate term '" + std::string(toks[t]) + "'", ln);
                std::uint16_t fi = field_idx(toks[t].substr(0, eq), ln);
                std::uint16_t enc = static_cast<std::uint16_t>(parse_u64(toks[t].substr(eq + 1), ln));
                p.predicate.emplace_back(fi, enc);
            }
            if (p.id >= points.size())
                points.resize(p.id + 1);
            points[p.id] = std::move(p);
        } else {
            throw ParseError("unknown directive '" + std::string(toks[0]) + "'", ln);
        }
    }

    for (const auto& p : points)
        groups.at(p.group_id).point_ids.push_back(p.id);

    return DutProfile(name, std::move(fields), std::move(points), std::move(groups), std::move(gates));
}

} // namespace covsel
