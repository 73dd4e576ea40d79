#include "daclin/dac_core.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "daclin/error.hpp"

namespace daclin {

void DacConfig::validate() const {
    if (bits < 2 || bits > 16)
        throw ConfigError("dac bits must be in [2, 16], got " + std::to_string(bits));
    if (seg_bits < 0 || seg_bits > bits)
        throw ConfigError("seg_bits must be in [0, bits], got " + std::to_string(seg_bits));
    if (!(unit_current > 0.0) || !std::isfinite(unit_current))
        throw ConfigError("unit_current must be positive");
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
        throw ConfigError("sample_rate must be positive");
}

MismatchProfile MismatchProfile::zero(const DacConfig& cfg) {
    MismatchProfile mm;
    mm.binary_deltas.assign(cfg.binary_drivers(), 0.0);
    mm.unit_deltas.assign(cfg.unit_cells(), 0.0);
    return mm;
}

void MismatchProfile::validate_for(const DacConfig& cfg) const {
    if (binary_deltas.size() != static_cast<std::size_t>(cfg.binary_drivers()))
        throw ConfigError("mismatch profile has " + std::to_string(binary_deltas.size()) +
                          " binary deltas, config needs " + std::to_string(cfg.binary_drivers()));
    if (unit_deltas.size() != static_cast<std::size_t>(cfg.unit_cells()))
        throw ConfigError("mismatch profile has " + std::to_string(unit_deltas.size()) +
                          " unit deltas, config needs " + std::to_string(cfg.unit_cells()));
    auto check = [](double d) {
        if (!std::isfinite(d) || std::abs(d) >= 1.0)
            throw ConfigError("mismatch delta out of (-1, 1): " + std::to_string(d));
    };
    for (double d : binary_deltas) check(d);
    for (double d : unit_deltas) check(d);
}

DacCode::DacCode(std::uint32_t value, const DacConfig& cfg) : value_(value) {
    if (value > cfg.max_code())
        throw RangeError("code " + std::to_string(value) + " outside [0, " +
                         std::to_string(cfg.max_code()) + "]");
}

Decomposition decompose(std::uint32_t code, const DacConfig& cfg) {
    DacCode checked(code, cfg);
    const int nb = cfg.binary_drivers();
    Decomposition d;
    d.thermometer_count = static_cast<int>(checked.value() >> nb);
    d.binary_bits.resize(nb);
    for (int m = 0; m < nb; ++m)
        d.binary_bits[m] = ((checked.value() >> m) & 1U) ? 1 : -1;
    return d;
}

std::uint32_t recompose(const Decomposition& d, const DacConfig& cfg) {
    std::uint32_t code = static_cast<std::uint32_t>(d.thermometer_count) << cfg.binary_drivers();
    for (std::size_t m = 0; m < d.binary_bits.size(); ++m)
        if (d.binary_bits[m] > 0) code |= 1U << m;
    return code;
}

namespace {

double binary_part(std::uint32_t code, const DacConfig& cfg, const MismatchProfile& mm) {
    double acc = 0.0;
    for (int m = 0; m < cfg.binary_drivers(); ++m) {
        const double w = static_cast<double>(1U << m) * (1.0 + mm.binary_deltas[m]);
        acc += ((code >> m) & 1U) ? w : -w;
    }
    return acc;
}

// Thermometer contribution written as 2 * (sum of active cells) - (sum of all
// cells). With identical deltas the active sum depends only on the count, so
// the result is bit-identical whichever cells are selected.
double unit_total(const DacConfig& cfg, const MismatchProfile& mm) {
    const double w = cfg.unit_cell_weight();
    double total = 0.0;
    for (double d : mm.unit_deltas) total += w * (1.0 + d);
    return total;
}

} // namespace

double static_output(std::uint32_t code, const DacConfig& cfg, const MismatchProfile& mm) {
    mm.validate_for(cfg);
    DacCode checked(code, cfg);
    const double w = cfg.unit_cell_weight();
    const int count = static_cast<int>(checked.value() >> cfg.binary_drivers());
    double active = 0.0;
    for (int t = 0; t < count; ++t) active += w * (1.0 + mm.unit_deltas[t]);
    const double thermo = 2.0 * active - unit_total(cfg, mm);
    return cfg.unit_current * (binary_part(checked.value(), cfg, mm) + thermo);
}

TransferCharacteristic transfer_table(const DacConfig& cfg, const MismatchProfile& mm) {
    cfg.validate();
    TransferCharacteristic tc;
    tc.outputs.resize(cfg.code_count());
    for (std::uint32_t x = 0; x < cfg.code_count(); ++x) tc.outputs[x] = static_output(x, cfg, mm);
    return tc;
}

MismatchProfile draw_mismatch(const DacConfig& cfg, double sigma_u, std::uint64_t seed) {
    cfg.validate();
    if (!(sigma_u >= 0.0) || !std::isfinite(sigma_u))
        throw ArgumentError("sigma_u must be a finite non-negative value");
    MismatchProfile mm;
    mm.sigma_u = sigma_u;
    mm.seed = seed;
    Rng rng(seed);
    auto draw = [&](double sd) {
        double d;
        do {
            d = sd * rng.normal();
        } while (std::abs(d) >= 1.0);
        return d;
    };
    mm.binary_deltas.resize(cfg.binary_drivers());
    for (int m = 0; m < cfg.binary_drivers(); ++m)
        mm.binary_deltas[m] = draw(sigma_u / std::sqrt(static_cast<double>(1U << m)));
    mm.unit_deltas.resize(cfg.unit_cells());
    for (auto& d : mm.unit_deltas) d = draw(sigma_u);
    return mm;
}

std::vector<double> convert(std::span<const std::uint32_t> codes, const DacConfig& cfg,
                            const MismatchProfile& mm, DemState& dem) {
    cfg.validate();
    mm.validate_for(cfg);
    std::vector<double> out(codes.size());
    if (!dem.enabled) {
        const TransferCharacteristic table = transfer_table(cfg, mm);
        for (std::size_t n = 0; n < codes.size(); ++n) {
            DacCode checked(codes[n], cfg);
            out[n] = table.outputs[checked.value()];
        }
        return out;
    }

    const int cells = cfg.unit_cells();
    const double w = cfg.unit_cell_weight();
    const double total = unit_total(cfg, mm);
    std::vector<double> binary(cfg.code_count() >> cfg.seg_bits);
    for (std::uint32_t low = 0; low < binary.size(); ++low) binary[low] = binary_part(low, cfg, mm);

    std::vector<int> order(cells);
    const std::uint32_t low_mask = (1U << cfg.binary_drivers()) - 1U;
    for (std::size_t n = 0; n < codes.size(); ++n) {
        DacCode checked(codes[n], cfg);
        const int count = static_cast<int>(checked.value() >> cfg.binary_drivers());
        std::iota(order.begin(), order.end(), 0);
        // partial Fisher-Yates: the first `count` slots are a uniform subset
        double active = 0.0;
        for (int t = 0; t < count; ++t) {
            const auto j = t + static_cast<int>(dem.rng.below(static_cast<std::uint64_t>(cells - t)));
            std::swap(order[t], order[j]);
            active += w * (1.0 + mm.unit_deltas[order[t]]);
        }
        out[n] = cfg.unit_current * (binary[checked.value() & low_mask] + (2.0 * active - total));
    }
    return out;
}

} // namespace daclin
