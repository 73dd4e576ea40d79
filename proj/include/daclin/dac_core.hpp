#pragma once

// Static behavioral model of a segmented current-steering DAC.
//
// The M-bit input code is split into S thermometer-decoded MSBs driving
// 2^S - 1 interchangeable unit cells of weight 2^(M-S), and M - S binary
// drivers of weight 2^m. Every driver steers its current differentially
// (b = +1 or -1), so the ideal output for code x is I_u * (2x - (2^M - 1)).

#include <cstdint>
#include <span>
#include <vector>

#include "daclin/rng.hpp"

namespace daclin {

struct DacConfig {
    int bits = 10;
    double unit_current = 1.0;
    int seg_bits = 4;
    double sample_rate = 40.96e9;

    void validate() const;

    int binary_drivers() const { return bits - seg_bits; }
    int unit_cells() const { return (1 << seg_bits) - 1; }
    std::uint32_t code_count() const { return 1U << bits; }
    std::uint32_t max_code() const { return code_count() - 1; }
    double unit_cell_weight() const { return static_cast<double>(1U << binary_drivers()); }
    // Peak differential output, (2^M - 1) * I_u.
    double full_scale() const { return static_cast<double>(max_code()) * unit_current; }
    double ideal_output(std::uint32_t code) const {
        return unit_current * (2.0 * code - static_cast<double>(max_code()));
    }
};

struct MismatchProfile {
    std::vector<double> binary_deltas; // index m -> driver of weight 2^m
    std::vector<double> unit_deltas;   // thermometer cells, fixed index order
    double sigma_u = 0.0;
    std::uint64_t seed = 0;

    static MismatchProfile zero(const DacConfig& cfg);

    // Throws ConfigError on length mismatch or |delta| >= 1.
    void validate_for(const DacConfig& cfg) const;
};

class DacCode {
public:
    DacCode(std::uint32_t value, const DacConfig& cfg);
    std::uint32_t value() const { return value_; }

private:
    std::uint32_t value_;
};

struct Decomposition {
    int thermometer_count = 0;
    std::vector<int> binary_bits; // +1/-1, index m
};

struct TransferCharacteristic {
    std::vector<double> outputs;
};

struct DemState {
    bool enabled = false;
    Rng rng;

    DemState() = default;
    DemState(bool on, std::uint64_t seed) : enabled(on), rng(seed) {}
};

Decomposition decompose(std::uint32_t code, const DacConfig& cfg);
std::uint32_t recompose(const Decomposition& d, const DacConfig& cfg);

double static_output(std::uint32_t code, const DacConfig& cfg, const MismatchProfile& mm);

TransferCharacteristic transfer_table(const DacConfig& cfg, const MismatchProfile& mm);

// unit cells ~ N(0, sigma_u^2); binary driver m ~ N(0, sigma_u^2 / 2^m).
// Draws with |delta| >= 1 are rejected and redrawn.
MismatchProfile draw_mismatch(const DacConfig& cfg, double sigma_u, std::uint64_t seed);

// Per-sample conversion. With DEM enabled the active unit cells are a fresh
// uniform random subset of the thermometer count on every sample.
std::vector<double> convert(std::span<const std::uint32_t> codes, const DacConfig& cfg,
                            const MismatchProfile& mm, DemState& dem);

} // namespace daclin
