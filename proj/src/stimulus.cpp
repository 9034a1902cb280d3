#include "covsel/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "covsel/errors.hpp"
#include "covsel/text_util.hpp"

namespace covsel {

ConstraintSpec::ConstraintSpec(const DutProfile& profile)
    : profile_(&profile), dists_(profile.field_count(), dist::Uniform{}) {}

ConstraintSpec::ConstraintSpec(const DutProfile& profile, std::vector<FieldDist> dists)
    : profile_(&profile), dists_(std::move(dists)) {
    validate();
}

void ConstraintSpec::set(std::uint16_t field, FieldDist d) {
    dists_.at(field) = std::move(d);
    validate();
}

void ConstraintSpec::validate() const {
    if (dists_.size() != profile_->field_count())
        throw Error("constraint spec must cover every field");
    for (std::size_t i = 0; i < dists_.size(); ++i) {
        const auto& f = profile_->fields()[i];
        if (const auto* w = std::get_if<dist::Weighted>(&dists_[i])) {
            if (f.kind == FieldKind::Wide32)
                throw Error("weighted distribution not applicable to wide field '" + f.name + "'");
            if (w->weights.size() != f.encoded_cardinality())
                throw Error("weight count mismatch for field '" + f.name + "'");
            double sum = 0.0;
            for (double x : w->weights) {
                if (!(x > 0.0) || !std::isfinite(x))
                    throw Error("weights must be positive and finite for field '" + f.name + "'");
                sum += x;
            }
            if (!(sum > 0.0))
                throw Error("weights must sum to a positive value");
        } else if (const auto* r = std::get_if<dist::Range>(&dists_[i])) {
            if (f.kind != FieldKind::Wide32)
                throw Error("range distribution only applies to wide fields");
            if (r->lo > r->hi)
                throw Error("empty range for field '" + f.name + "'");
        } else if (const auto* lr = std::get_if<dist::LogRange>(&dists_[i])) {
            if (f.kind != FieldKind::Wide32)
                throw Error("logrange distribution only applies to wide fields");
            if (lr->lo > lr->hi)
                throw Error("empty range for field '" + f.name + "'");
        } else if (const auto* fx = std::get_if<dist::Fixed>(&dists_[i])) {
            if (!f.legal_raw(fx->value))
                throw Error("fixed value out of domain for field '" + f.name + "'");
        }
    }
}

std::uint32_t ConstraintSpec::draw_field(std::uint16_t field, Rng& rng) const {
    const auto& f = profile_->fields()[field];
    const auto& d = dists_[field];

    if (const auto* fx = std::get_if<dist::Fixed>(&d))
        return fx->value;

    if (const auto* w = std::get_if<dist::Weighted>(&d)) {
        double total = 0.0;
        for (double x : w->weights)
            total += x;
        double r = rng.next_double() * total;
        for (std::size_t v = 0; v < w->weights.size(); ++v) {
            r -= w->weights[v];
            if (r < 0.0)
                return static_cast<std::uint32_t>(v);
        }
        return static_cast<std::uint32_t>(w->weights.size() - 1);
    }

    if (const auto* r = std::get_if<dist::Range>(&d))
        return static_cast<std::uint32_t>(rng.next_in(r->lo, r->hi));

    if (const auto* lr = std::get_if<dist::LogRange>(&d)) {
        std::uint16_t blo = bucket_of(lr->lo);
        std::uint16_t bhi = bucket_of(lr->hi);
        std::uint16_t b = static_cast<std::uint16_t>(rng.next_in(blo, bhi));
        auto [lo, hi] = bucket_range(b);
        lo = std::max<std::uint64_t>(lo, lr->lo);
        hi = std::min<std::uint64_t>(hi, lr->hi);
        return static_cast<std::uint32_t>(rng.next_in(lo, hi));
    }

    // uniform
    switch (f.kind) {
    case FieldKind::Binary: return static_cast<std::uint32_t>(rng.next_below(2));
    case FieldKind::Enum: return static_cast<std::uint32_t>(rng.next_below(f.values.size()));
    case FieldKind::Wide32: return static_cast<std::uint32_t>(rng.next_u64() & 0xffffffffull);
    }
    return 0;
}

TestVector ConstraintSpec::draw(Rng& rng) const {
    TestVector test(dists_.size());
    for (std::size_t i = 0; i < dists_.size(); ++i)
        test[i] = draw_field(static_cast<std::uint16_t>(i), rng);
    return test;
}

std::vector<TestVector> generate_tests(const DutProfile& profile, const ConstraintSpec& spec,
                                       std::size_t n, std::uint64_t seed) {
    if (n < 1)
        throw Error("generate_tests requires n >= 1");
    Rng rng(derive_seed(seed, {0x9e4}));
    std::vector<TestVector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(spec.draw(rng));
        profile.check_legal(out.back());
    }
    return out;
}

EncodedMatrix encode_batch(const DutProfile& profile, const std::vector<TestVector>& tests, ExecMode mode) {
    EncodedMatrix m;
    m.rows = tests.size();
    m.cols = profile.field_count();
    m.data.resize(m.rows * m.cols);
    parallel_for(m.rows, mode, [&](std::size_t r) {
        EncodedVector enc;
        try {
            enc = encode(profile, tests[r]);
        } catch (const IllegalStimulus& e) {
            throw IllegalStimulus("row " + std::to_string(r) + ": " + e.what());
        }
        std::copy(enc.begin(), enc.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
    });
    return m;
}

// --- spec file format --------------------------------------------------
//
//   # covsel-spec v1
//   dist <field> uniform
//   dist <field> fixed <raw>
//   dist <field> weights <w> <w> ...
//   dist <field> range <lo> <hi>
//   dist <field> logrange <lo> <hi>

void ConstraintSpec::save(const std::string& path) const {
    std::ostringstream out;
    out << header_line("spec");
    for (std::size_t i = 0; i < dists_.size(); ++i) {
        out << "dist " << profile_->fields()[i].name << ' ';
        if (std::holds_alternative<dist::Uniform>(dists_[i])) {
            out << "uniform";
        } else if (const auto* fx = std::get_if<dist::Fixed>(&dists_[i])) {
            out << "fixed " << fx->value;
        } else if (const auto* w = std::get_if<dist::Weighted>(&dists_[i])) {
            out << "weights";
            for (double x : w->weights)
                out << ' ' << format_double(x);
        } else if (const auto* r = std::get_if<dist::Range>(&dists_[i])) {
            out << "range " << r->lo << ' ' << r->hi;
        } else if (const auto* lr = std::get_if<dist::LogRange>(&dists_[i])) {
            out << "logrange " << lr->lo << ' ' << lr->hi;
        }
        out << '\n';
    }
    write_file(path, out.str());
}

ConstraintSpec ConstraintSpec::load(const std::string& path, const DutProfile& profile) {
    auto lines = read_lines(path);
    expect_header(lines, "spec");
    ConstraintSpec spec(profile);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::size_t ln = i + 1;
        auto toks = tokenize(lines[i]);
        if (toks.empty() || toks[0][0] == '#')
            continue;
        if (toks[0] != "dist" || toks.size() < 3)
            throw ParseError("expected 'dist <field> <kind> ...'", ln);
        std::uint16_t fi = profile.field_index(std::string(toks[1]));
        if (toks[2] == "uniform") {
            spec.set(fi, dist::Uniform{});
        } else if (toks[2] == "fixed" && toks.size() == 4) {
            spec.set(fi, dist::Fixed{static_cast<std::uint32_t>(parse_u64(toks[3], ln))});
        } else if (toks[2] == "weights") {
            dist::Weighted w;
            for (std::size_t t = 3; t < toks.size(); ++t)
                w.weights.push_back(parse_double(toks[t], ln));
            spec.set(fi, std::move(w));
        } else if (toks[2] == "range" && toks.size() == 5) {
            spec.set(fi, dist::Range{static_cast<std::uint32_t>(parse_u64(toks[3], ln)),
                                     static_cast<std::uint32_t>(parse_u64(toks[4], ln))});
        } else if (toks[2] == "logrange" && toks.size() == 5) {
            spec.set(fi, dist::LogRange{static_cast<std::uint32_t>(parse_u64(toks[3], ln)),
                                        static_cast<std::uint32_t>(parse_u64(toks[4], ln))});
        } else {
            throw ParseError("unknown distribution '" + std::string(toks[2]) + "'", ln);
        }
    }
    return spec;
}

} // namespace covsel
