#pragma once

// Pre-distortion lookup table: invert a tabulated transfer estimate against
// its own least-squares line, at code granularity.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "daclin/dac_core.hpp"
#include "daclin/sysid.hpp"

namespace daclin {

enum class EstimateSource { mlp, poly, oracle };

std::string to_string(EstimateSource s);

struct TransferEstimate {
    std::vector<double> values; // normalized output per code
    EstimateSource source = EstimateSource::oracle;

    int bits() const;
    void validate() const;
};

struct LinearTarget {
    double gain = 0.0;
    double offset = 0.0;
    // false when the fitted gain is not positive
    bool increasing = true;

    double at(double code) const { return gain * code + offset; }
};

struct Lut {
    int bits = 10;
    std::vector<std::uint32_t> entries;

    void validate() const;
    std::size_t identity_deviations() const;
};

TransferEstimate tabulate(const Model& model, int bits);
// Exact transfer table divided by the DAC full scale.
TransferEstimate tabulate_oracle(const DacConfig& cfg, const MismatchProfile& mm);

LinearTarget fit_linear_target(const TransferEstimate& est);

// entries[x] = argmin_x' |est[x'] - line(x)|, ties to the smaller x'.
Lut build_lut(const TransferEstimate& est, const LinearTarget& target);

std::vector<std::uint32_t> apply_lut(const Lut& lut, std::span<const std::uint32_t> codes);

Lut oracle_lut(const DacConfig& cfg, const MismatchProfile& mm);

} // namespace daclin
