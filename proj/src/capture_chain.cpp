#include "daclin/capture_chain.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"

#include "daclin/error.hpp"

namespace daclin {

void MeasurementPathConfig::validate() const {
    if (filter_order < 1 || filter_order > 4)
        throw ConfigError("filter_order must be 1..4, got " + std::to_string(filter_order));
    if (!(sample_rate > 0.0)) throw ConfigError("path sample_rate must be positive");
    if (!(cutoff_hz > 0.0)) throw ConfigError("cutoff_hz must be positive");
}

void AdcConfig::validate() const {
    if (bits < 2 || bits > 24) throw ConfigError("adc bits must be in [2, 24]");
    if (!(full_scale > 0.0)) throw ConfigError("adc full_scale must be positive");
    if (!(noise_rms_lsb >= 0.0)) throw ConfigError("adc noise_rms_lsb must be >= 0");
}

void Dataset::validate() const {
    if (x.empty()) throw ArgumentError("dataset is empty");
    if (x.size() != y.size() || index.size() != x.size())
        throw ArgumentError("dataset columns differ in length");
    const std::uint32_t max_code = (1U << bits) - 1U;
    for (std::size_t n = 0; n < x.size(); ++n) {
        if (x[n] > max_code) throw RangeError("dataset code out of range");
        if (!(std::abs(y[n]) <= 1.0)) throw RangeError("dataset output outside [-1, 1]");
    }
}

std::complex<double> BiquadChain::response(double freq_hz, double sample_rate) const {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = 1.0;
    for (const auto& s : sections)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return h;
}

double BiquadChain::dc_gain() const {
    double g = 1.0;
    for (const auto& s : sections) g *= (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    return g;
}

BiquadChain design_butterworth(const MeasurementPathConfig& cfg) {
    cfg.validate();
    if (cfg.cutoff_hz >= cfg.sample_rate / 2.0)
        throw DesignError("cutoff " + std::to_string(cfg.cutoff_hz) + " Hz is not below Nyquist " +
                          std::to_string(cfg.sample_rate / 2.0) + " Hz");

    // Prewarped bilinear map s = (1/K)(1 - z^-1)/(1 + z^-1) onto the
    // unit-cutoff analog prototype puts the -3 dB point exactly at cutoff_hz.
    const double k = std::tan(std::numbers::pi * cfg.cutoff_hz / cfg.sample_rate);
    const double k2 = k * k;
    const int n = cfg.filter_order;
    BiquadChain chain;

    for (int i = 0; i < n / 2; ++i) {
        // conjugate pole pair at angle theta: s^2 + 2 sin(theta') s + 1
        const double theta = std::numbers::pi * (2.0 * i + 1.0) / (2.0 * n);
        const double damp = 2.0 * std::sin(theta);
        const double a0 = 1.0 + damp * k + k2;
        Biquad s;
        s.b0 = k2 / a0;
        s.b1 = 2.0 * k2 / a0;
        s.b2 = k2 / a0;
        s.a1 = (2.0 * k2 - 2.0) / a0;
        s.a2 = (1.0 - damp * k + k2) / a0;
        chain.sections.push_back(s);
    }
    if (n % 2 == 1) {
        const double a0 = 1.0 + k;
        Biquad s;
        s.b0 = k / a0;
        s.b1 = k / a0;
        s.a1 = (k - 1.0) / a0;
        chain.sections.push_back(s);
    }
    return chain;
}

std::vector<double> filter_apply(const BiquadChain& chain, std::span<const double> waveform) {
    std::vector<double> out(waveform.begin(), waveform.end());
    for (const auto& s : chain.sections) {
        double z1 = 0.0, z2 = 0.0;
        for (double& v : out) {
            const double in = v;
            const double y = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * y + z2;
            z2 = s.b2 * in - s.a2 * y;
            v = y;
        }
    }
    return out;
}

std::vector<double> adc_quantize(std::span<const double> waveform, const AdcConfig& cfg,
                                 std::uint64_t seed) {
    cfg.validate();
    const double lsb = cfg.lsb();
    const double top = static_cast<double>((1U << cfg.bits) - 1U);
    Rng rng(seed);
    std::vector<double> out(waveform.size());
    for (std::size_t n = 0; n < waveform.size(); ++n) {
        double v = waveform[n];
        if (cfg.noise_rms_lsb > 0.0) v += cfg.noise_rms_lsb * lsb * rng.normal();
        double level = std::floor((v + cfg.full_scale) / lsb + 0.5);
        if (level < 0.0) level = 0.0;
        if (level > top) level = top;
        out[n] = -1.0 + 2.0 * level / top;
    }
    return out;
}

Dataset capture(std::span<const std::uint32_t> codes, const CaptureSetup& setup) {
    setup.dac.validate();
    setup.mismatch.validate_for(setup.dac);
    setup.path.validate();
    setup.adc.validate();
    if (std::abs(setup.path.sample_rate - setup.dac.sample_rate) > 1e-9 * setup.dac.sample_rate)
        throw ConfigError("measurement path sample_rate differs from DAC sample_rate");
    if (std::abs(setup.adc.full_scale - setup.dac.full_scale()) > 1e-12 * setup.dac.full_scale())
        throw ConfigError("ADC full_scale must equal DAC full scale " +
                          std::to_string(setup.dac.full_scale()));
    if (setup.averages < 1) throw ConfigError("averages must be >= 1");
    if (codes.size() <= kCaptureWarmup)
        throw ArgumentError("capture needs more than " + std::to_string(kCaptureWarmup) + " samples");

    const BiquadChain chain = design_butterworth(setup.path);
    std::vector<double> acc(codes.size(), 0.0);
    for (int rep = 0; rep < setup.averages; ++rep) {
        DemState dem(setup.dem, derive_seed(setup.dem_seed, static_cast<std::uint64_t>(rep)));
        const auto analog = convert(codes, setup.dac, setup.mismatch, dem);
        const auto filtered = filter_apply(chain, analog);
        const auto digital =
            adc_quantize(filtered, setup.adc, derive_seed(setup.adc_seed, static_cast<std::uint64_t>(rep)));
        for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += digital[n];
    }

    Dataset ds;
    ds.bits = setup.dac.bits;
    const std::size_t count = codes.size() - kCaptureWarmup;
    ds.index.resize(count);
    ds.x.resize(count);
    ds.y.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n = i + kCaptureWarmup;
        ds.index[i] = n;
        ds.x[i] = codes[n];
        ds.y[i] = acc[n] / setup.averages;
    }

    nlohmann::ordered_json meta;
    meta["samples"] = codes.size();
    meta["warmup_dropped"] = kCaptureWarmup;
    meta["dac"] = {{"bits", setup.dac.bits},
                   {"seg_bits", setup.dac.seg_bits},
                   {"unit_current", setup.dac.unit_current},
                   {"sample_rate", setup.dac.sample_rate},
                   {"sigma_u", setup.mismatch.sigma_u},
                   {"mismatch_seed", setup.mismatch.seed}};
    meta["dem"] = {{"enabled", setup.dem}, {"seed", setup.dem_seed}};
    meta["path"] = {{"filter_order", setup.path.filter_order},
                    {"cutoff_hz", setup.path.cutoff_hz},
                    {"sample_rate", setup.path.sample_rate}};
    meta["adc"] = {{"bits", setup.adc.bits},
                   {"full_scale", setup.adc.full_scale},
                   {"noise_rms_lsb", setup.adc.noise_rms_lsb},
                   {"seed", setup.adc_seed}};
    meta["averages"] = setup.averages;
    ds.metadata_json = meta.dump();
    return ds;
}

std::vector<double> per_code_mean(const Dataset& ds) {
    const std::size_t codes = std::size_t{1} << ds.bits;
    std::vector<double> sum(codes, 0.0);
    std::vector<std::size_t> hits(codes, 0);
    for (std::size_t n = 0; n < ds.size(); ++n) {
        sum[ds.x[n]] += ds.y[n];
        ++hits[ds.x[n]];
    }
    std::vector<double> mean(codes, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 0; c < codes; ++c)
        if (hits[c] > 0) mean[c] = sum[c] / static_cast<double>(hits[c]);
    return mean;
}

} // namespace daclin
