#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "covsel/dut.hpp"
#include "covsel/parallel.hpp"
#include "covsel/rng.hpp"

namespace covsel {

// Per-field sampling distributions for constrained-random generation.
namespace dist {

struct Uniform {};

// Weighted categorical over the declared values of a binary/enum field.
struct Weighted {
    std::vector<double> weights;
};

// Uniform over [lo, hi], wide fields only.
struct Range {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0xffffffffu;
};

// Bucket-stratified: picks a power-of-two bucket uniformly among those that
// intersect [lo, hi], then a value inside. Spreads wide-field draws across
// the whole encoded range instead of piling into the top buckets.
struct LogRange {
    std::uint32_t lo = 0;
    std::uint32_t hi = 0xffffffffu;
};

struct Fixed {
    std::uint32_t value = 0;
};

} // namespace dist

using FieldDist = std::variant<dist::Uniform, dist::Weighted, dist::Range, dist::LogRange, dist::Fixed>;

class ConstraintSpec {
public:
    // Uniform over every field.
    explicit ConstraintSpec(const DutProfile& profile);
    ConstraintSpec(const DutProfile& profile, std::vector<FieldDist> dists);

    void set(std::uint16_t field, FieldDist d);
    const std::vector<FieldDist>& dists() const { return dists_; }

    std::uint32_t draw_field(std::uint16_t field, Rng& rng) const;
    TestVector draw(Rng& rng) const;

    void save(const std::string& path) const;
    static ConstraintSpec load(const std::string& path, const DutProfile& profile);

private:
    void validate() const;
    const DutProfile* profile_;
    std::vector<FieldDist> dists_;
};

// n independent draws, reproducible from seed.
std::vector<TestVector> generate_tests(const DutProfile& profile, const ConstraintSpec& spec,
                                       std::size_t n, std::uint64_t seed);

// Row-major encoded feature matrix.
struct EncodedMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint16_t> data;

    std::uint16_t at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    const std::uint16_t* row(std::size_t r) const { return data.data() + r * cols; }
};

EncodedMatrix encode_batch(const DutProfile& profile, const std::vector<TestVector>& tests,
                           ExecMode mode = ExecMode::Serial);

} // namespace covsel
