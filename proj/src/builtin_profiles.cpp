#include "covsel/builtin_profiles.hpp"

#include <algorithm>

#include "covsel/errors.hpp"
#include "covsel/rng.hpp"

namespace covsel {

namespace {

// Appends the full cross product of the given fields' encoded domains as one
// group. Returns the new group id.
std::uint32_t add_cross_group(const std::vector<ConfigField>& fields,
                              std::vector<CoveragePoint>& points,
                              std::vector<CoverageGroup>& groups,
                              std::vector<std::optional<Gate>>& gates,
                              const std::string& name,
                              const std::vector<std::uint16_t>& cross_fields,
                              std::optional<Gate> gate = std::nullopt) {
    CoverageGroup group;
    group.group_id = static_cast<std::uint32_t>(groups.size());
    group.name = name;

    std::vector<std::uint16_t> radix;
    for (std::uint16_t f : cross_fields)
        radix.push_back(fields[f].encoded_cardinality());

    std::vector<std::uint16_t> idx(cross_fields.size(), 0);
    while (true) {
        CoveragePoint p;
        p.id = static_cast<std::uint32_t>(points.size());
        p.group_id = group.group_id;
        for (std::size_t i = 0; i < cross_fields.size(); ++i)
            p.predicate.emplace_back(cross_fields[i], idx[i]);
        group.point_ids.push_back(p.id);
        points.push_back(std::move(p));

        std::size_t d = cross_fields.size();
        while (d > 0) {
            --d;
            if (++idx[d] < radix[d])
                break;
            idx[d] = 0;
            if (d == 0)
                goto done;
        }
    }
done:
    groups.push_back(std::move(group));
    gates.push_back(std::move(gate));
    return groups.back().group_id;
}

} // namespace

DutProfile make_mini_radar_profile() {
    std::vector<ConfigField> fields = {
        {"input_interface", FieldKind::Enum, {"MEM", "RDR"}},
        {"data_size", FieldKind::Enum, {"1", "2", "3", "4"}},
        {"output_active", FieldKind::Binary, {}},
        {"data_bin", FieldKind::Wide32, {}},
    };

    std::vector<CoveragePoint> points;
    std::vector<CoverageGroup> groups;
    std::vector<std::optional<Gate>> gates;

    add_cross_group(fields, points, groups, gates, "io_modes", {0, 2});
    add_cross_group(fields, points, groups, gates, "full_cross", {0, 1, 2, 3});

    // Radar-receive processing with output written back and a high bin value.
    Gate hiband;
    hiband.atoms = {{0, GateOp::Eq, 1}, {2, GateOp::Eq, 1}, {3, GateOp::Ge, 65536}};
    add_cross_group(fields, points, groups, gates, "radar_hiband", {1, 3}, hiband);

    return DutProfile("mini-radar", std::move(fields), std::move(points), std::move(groups),
                      std::move(gates));
}

DutProfile make_mini_rspu_profile(const MiniRspuParams& params) {
    if (params.gated_count >= params.group_count)
        throw Error("gated_count must be below group_count");

    Rng rng(derive_seed(params.seed, {0xbe9c4}));

    std::vector<ConfigField> fields;
    for (int i = 0; i < 8; ++i)
        fields.push_back({"b" + std::to_string(i), FieldKind::Binary, {}});
    const std::uint32_t enum_cards[12] = {4, 5, 6, 8, 4, 5, 6, 8, 4, 5, 6, 8};
    for (int i = 0; i < 12; ++i) {
        ConfigField f{"e" + std::to_string(i), FieldKind::Enum, {}};
        for (std::uint32_t v = 0; v < enum_cards[i]; ++v)
            f.values.push_back("v" + std::to_string(v));
        fields.push_back(std::move(f));
    }
    for (int i = 0; i < 4; ++i)
        fields.push_back({"w" + std::to_string(i), FieldKind::Wide32, {}});

    auto field_id = [&](const std::string& n) {
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (fields[i].name == n)
                return static_cast<std::uint16_t>(i);
        throw Error("internal: field " + n);
    };

    // Spread the gated groups through the id range.
    std::vector<char> is_gated(params.group_count, 0);
    for (std::uint32_t i = 0; i < params.gated_count; ++i)
        is_gated[(i * params.group_count) / params.gated_count + params.group_count /
                     (2 * params.gated_count)] = 1;

    std::vector<CoveragePoint> points;
    std::vector<CoverageGroup> groups;
    std::vector<std::optional<Gate>> gates;

    std::uint32_t plain_n = 0, hard_n = 0;
    for (std::uint32_t g = 0; g < params.group_count; ++g) {
        if (!is_gated[g]) {
            // 2-3 field cross with 24..96 points.
            std::vector<std::uint16_t> cross;
            for (int tries = 0; tries < 1000; ++tries) {
                std::size_t k = 2 + rng.next_below(2);
                std::vector<std::uint16_t> cand;
                while (cand.size() < k) {
                    std::uint16_t f = static_cast<std::uint16_t>(rng.next_below(fields.size()));
                    if (std::find(cand.begin(), cand.end(), f) == cand.end())
                        cand.push_back(f);
                }
                std::uint64_t prod = 1;
                for (std::uint16_t f : cand)
                    prod *= fields[f].encoded_cardinality();
                if (prod >= 24 && prod <= 96) {
                    std::sort(cand.begin(), cand.end());
                    cross = std::move(cand);
                    break;
                }
            }
            if (cross.empty())
                throw Error("internal: could not draw a cross");
            char buf[16];
            std::snprintf(buf, sizeof(buf), "grp%02u", plain_n++);
            add_cross_group(fields, points, groups, gates, buf, cross);
        } else {
            // Gate: binary=1, a 5/6-valued enum at its top value, and one
            // wide field above a high power of two. Cross fields are kept
            // disjoint from the gate fields so every bin stays reachable.
            Gate gate;
            std::uint16_t gb = field_id("b" + std::to_string(rng.next_below(8)));
            static const char* mid_enums[] = {"e2", "e6", "e10"};
            std::uint16_t ge = field_id(mid_enums[rng.next_below(3)]);
            std::uint16_t gw = field_id("w" + std::to_string(rng.next_below(4)));
            gate.atoms = {
                {gb, GateOp::Eq, 1},
                {ge, GateOp::Eq, static_cast<std::uint32_t>(fields[ge].values.size() - 1)},
                {gw, GateOp::Ge, 1u << params.gate_wide_exp},
            };

            std::vector<std::uint16_t> cross;
            for (int tries = 0; tries < 1000; ++tries) {
                std::vector<std::uint16_t> cand;
                while (cand.size() < 2) {
                    std::uint16_t f = static_cast<std::uint16_t>(rng.next_below(fields.size()));
                    if (f == gb || f == ge || f == gw)
                        continue;
                    if (std::find(cand.begin(), cand.end(), f) == cand.end())
                        cand.push_back(f);
                }
                std::uint64_t prod = static_cast<std::uint64_t>(fields[cand[0]].encoded_cardinality()) *
                                     fields[cand[1]].encoded_cardinality();
                if (prod >= 48 && prod <= 66) {
                    std::sort(cand.begin(), cand.end());
                    cross = std::move(cand);
                    break;
                }
            }
            if (cross.empty())
                throw Error("internal: could not draw a gated cross");
            char buf[16];
            std::snprintf(buf, sizeof(buf), "hard%02u", hard_n++);
            add_cross_group(fields, points, groups, gates, buf, cross, gate);
        }
    }

    return DutProfile("mini-rspu", std::move(fields), std::move(points), std::move(groups),
                      std::move(gates));
}

std::optional<DutProfile> make_builtin_profile(const std::string& name) {
    if (name == "mini-radar")
        return make_mini_radar_profile();
    if (name == "mini-rspu")
        return make_mini_rspu_profile();
    return std::nullopt;
}

BuiltinDbDefaults builtin_db_defaults(const std::string& name) {
    if (name == "mini-radar")
        return {600, 1400};
    return {600, 19400};
}

} // namespace covsel
