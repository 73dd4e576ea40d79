#include "daclin/dpd_lut.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "daclin/error.hpp"

namespace daclin {

std::string to_string(EstimateSource s) {
    switch (s) {
    case EstimateSource::mlp: return "mlp";
    case EstimateSource::poly: return "poly";
    case EstimateSource::oracle: return "oracle";
    }
    return "unknown";
}

int TransferEstimate::bits() const { return std::countr_zero(values.size()); }

void TransferEstimate::validate() const {
    if (values.size() < 4 || !std::has_single_bit(values.size()))
        throw ArgumentError("transfer estimate length must be 2^M");
    for (double v : values)
        if (!std::isfinite(v)) throw ArgumentError("transfer estimate contains non-finite values");
}

void Lut::validate() const {
    if (bits < 2 || bits > 16) throw ConfigError("LUT bits must be in [2, 16]");
    if (entries.size() != (std::size_t{1} << bits))
        throw ConfigError("LUT has " + std::to_string(entries.size()) + " entries, expected 2^" +
                          std::to_string(bits));
    const std::uint32_t top = (1U << bits) - 1U;
    for (auto e : entries)
        if (e > top) throw RangeError("LUT entry " + std::to_string(e) + " outside code range");
}

std::size_t Lut::identity_deviations() const {
    std::size_t count = 0;
    for (std::size_t x = 0; x < entries.size(); ++x)
        if (entries[x] != x) ++count;
    return count;
}

TransferEstimate tabulate(const Model& model, int bits) {
    TransferEstimate est;
    est.source = std::holds_alternative<MlpModel>(model) ? EstimateSource::mlp : EstimateSource::poly;
    est.values.resize(std::size_t{1} << bits);
    for (std::uint32_t x = 0; x < est.values.size(); ++x) est.values[x] = model_eval(model, x);
    return est;
}

TransferEstimate tabulate_oracle(const DacConfig& cfg, const MismatchProfile& mm) {
    TransferEstimate est;
    est.source = EstimateSource::oracle;
    est.values = transfer_table(cfg, mm).outputs;
    const double fs = cfg.full_scale();
    for (double& v : est.values) v /= fs;
    return est;
}

LinearTarget fit_linear_target(const TransferEstimate& est) {
    est.validate();
    const double n = static_cast<double>(est.values.size());
    const double x_mean = (n - 1.0) / 2.0;
    const double y_mean = std::accumulate(est.values.begin(), est.values.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t x = 0; x < est.values.size(); ++x) {
        const double dx = static_cast<double>(x) - x_mean;
        const double dy = est.values[x] - y_mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (syy == 0.0) throw ArgumentError("degenerate transfer estimate: zero variance");
    LinearTarget t;
    t.gain = sxy / sxx;
    t.offset = y_mean - t.gain * x_mean;
    t.increasing = t.gain > 0.0;
    return t;
}

Lut build_lut(const TransferEstimate& est, const LinearTarget& target) {
    est.validate();
    const std::size_t size = est.values.size();

    // Codes sorted by (value, code); the head of each run of equal values is
    // the smallest code holding that value.
    std::vector<std::uint32_t> order(size);
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return est.values[a] < est.values[b]; });
    std::vector<double> sorted(size);
    for (std::size_t i = 0; i < size; ++i) sorted[i] = est.values[order[i]];

    auto run_head = [&](double value) {
        const auto it = std::lower_bound(sorted.begin(), sorted.end(), value);
        return order[static_cast<std::size_t>(it - sorted.begin())];
    };

    Lut lut;
    lut.bits = est.bits();
    lut.entries.resize(size);
    for (std::size_t x = 0; x < size; ++x) {
        const double t = target.at(static_cast<double>(x));
        const auto pos = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
        if (pos == 0) {
            lut.entries[x] = run_head(sorted.front());
        } else if (pos == size) {
            lut.entries[x] = run_head(sorted.back());
        } else {
            const double below = sorted[pos - 1];
            const double above = sorted[pos];
            const double d_below = std::abs(below - t);
            const double d_above = std::abs(above - t);
            if (d_below < d_above)
                lut.entries[x] = run_head(below);
            else if (d_above < d_below)
                lut.entries[x] = run_head(above);
            else
                lut.entries[x] = std::min(run_head(below), run_head(above));
        }
    }
    return lut;
}

std::vector<std::uint32_t> apply_lut(const Lut& lut, std::span<const std::uint32_t> codes) {
    std::vector<std::uint32_t> out(codes.size());
    for (std::size_t n = 0; n < codes.size(); ++n) {
        if (codes[n] >= lut.entries.size())
            throw RangeError("code " + std::to_string(codes[n]) + " outside LUT range");
        out[n] = lut.entries[codes[n]];
    }
    return out;
}

Lut oracle_lut(const DacConfig& cfg, const MismatchProfile& mm) {
    const TransferEstimate est = tabulate_oracle(cfg, mm);
    return build_lut(est, fit_linear_target(est));
}

} // namespace daclin
