#pragma once

// DAC-to-ADC measurement path: Butterworth lowpass (bilinear, prewarped at the
// cutoff) followed by a uniform quantizer whose levels sit on the ideal DAC
// output grid. capture() turns a code stream into an identification Dataset.

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "daclin/dac_core.hpp"

namespace daclin {

struct MeasurementPathConfig {
    int filter_order = 2;
    double cutoff_hz = 20e9;
    double sample_rate = 40.96e9;

    void validate() const;
};

struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0; // a0 normalized to 1
};

struct BiquadChain {
    std::vector<Biquad> sections;

    std::complex<double> response(double freq_hz, double sample_rate) const;
    double dc_gain() const;
};

struct AdcConfig {
    int bits = 10;
    double full_scale = 1023.0;
    double noise_rms_lsb = 0.0;

    void validate() const;
    double lsb() const { return 2.0 * full_scale / static_cast<double>((1U << bits) - 1U); }
};

struct Dataset {
    int bits = 10; // DAC resolution of x
    std::vector<std::uint64_t> index;
    std::vector<std::uint32_t> x;
    std::vector<double> y;
    std::string metadata_json = "{}";

    std::size_t size() const { return x.size(); }
    void validate() const;
};

BiquadChain design_butterworth(const MeasurementPathConfig& cfg);

// Direct-form II transposed, zero initial state on every call.
std::vector<double> filter_apply(const BiquadChain& chain, std::span<const double> waveform);

// Output normalized to [-1, 1]; one LSB of output is 2 / (2^bits - 1).
std::vector<double> adc_quantize(std::span<const double> waveform, const AdcConfig& cfg,
                                 std::uint64_t seed);

struct CaptureSetup {
    DacConfig dac;
    MismatchProfile mismatch;
    bool dem = false;
    std::uint64_t dem_seed = 0;
    MeasurementPathConfig path;
    AdcConfig adc;
    std::uint64_t adc_seed = 0;
    // Repeated captures averaged sample-wise; each repeat reseeds ADC noise.
    int averages = 1;
};

inline constexpr std::size_t kCaptureWarmup = 64;

Dataset capture(std::span<const std::uint32_t> codes, const CaptureSetup& setup);

// Mean captured output per code, NaN where a code never occurs.
std::vector<double> per_code_mean(const Dataset& ds);

} // namespace daclin
