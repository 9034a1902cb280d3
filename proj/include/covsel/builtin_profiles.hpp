#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "covsel/dut.hpp"

namespace covsel {

// Four-field radar processor used throughout the docs and tests: inputs come
// from memory or a radar receiver, are binned into registers by data_bin and
// processed by size, optionally writing results back out. The "radar_hiband"
// group is gated on (input_interface=RDR, output_active=1, data_bin>=2^16).
DutProfile make_mini_radar_profile();

// Synthetic benchmark DUT: 24 configuration fields, ~50 cross-product
// coverage groups / ~3000 points, a fraction of groups gated on rare
// conjunctions. Scaled to run selection experiments in minutes.
struct MiniRspuParams {
    std::uint64_t seed = 7;
    std::uint32_t group_count = 50;
    std::uint32_t gated_count = 7;
    // Gate atoms: one binary pinned to 1, one enum pinned to its top value,
    // one wide field >= 2^wide_exp.
    std::uint32_t gate_wide_exp = 28;
};

DutProfile make_mini_rspu_profile(const MiniRspuParams& params = {});

// nullopt when the name is not a known builtin ("mini-radar", "mini-rspu").
std::optional<DutProfile> make_builtin_profile(const std::string& name);

// Database sizes used by the stock benchmarks.
struct BuiltinDbDefaults {
    std::uint32_t golden = 0;
    std::uint32_t filler = 0;
};
BuiltinDbDefaults builtin_db_defaults(const std::string& name);

} // namespace covsel
