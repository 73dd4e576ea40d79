#pragma once

// Coherently sampled code-domain stimuli. Tones are snapped to odd DFT bins so
// that one record holds an integer number of periods and the full code
// pattern never repeats inside the record.

#include <cstdint>
#include <optional>
#include <vector>

namespace daclin {

struct ToneSpec {
    double freq_hz = 0.0;
    double amplitude_dbfs = 0.0; // -infinity selects a silent tone
    double phase_rad = 0.0;
};

struct PlannedTone {
    ToneSpec spec;
    std::uint64_t bin = 0;
    double snapped_hz = 0.0;
};

struct StimulusPlan {
    std::uint64_t n_samples = 65536;
    double sample_rate = 40.96e9;
    std::vector<PlannedTone> tones;
    // Defaults to mid-scale (2^M - 1) / 2 when unset.
    std::optional<double> dc_offset_code;

    void validate() const;
};

std::uint64_t coherent_bin(double freq_hz, double sample_rate, std::uint64_t n_samples);

StimulusPlan make_plan(std::uint64_t n_samples, double sample_rate, const std::vector<ToneSpec>& tones);

// Two tones centred on center_hz with the given spacing, equal per-tone level.
StimulusPlan two_tone_plan(double center_hz, double spacing_hz, double dbfs_per_tone,
                           std::uint64_t n_samples, double sample_rate);

struct GeneratedCodes {
    std::vector<std::uint32_t> codes;
    std::size_t clipped = 0;
};

// `length` defaults to plan.n_samples; longer records continue the same
// periodic waveform.
GeneratedCodes gen_codes(const StimulusPlan& plan, int bits, std::optional<std::uint64_t> length = {});

// Unrounded code-domain waveform (offset removed), amplitude A_FS = (2^M-1)/2.
std::vector<double> tone_waveform(const StimulusPlan& plan, int bits);

inline constexpr double kIdentFrequencyHz = 100e6;
inline constexpr double kIdentAmplitudeDbfs = -0.5;

StimulusPlan ident_plan(double sample_rate, std::uint64_t n_samples,
                        double amplitude_dbfs = kIdentAmplitudeDbfs);
std::vector<std::uint32_t> ident_stimulus(double sample_rate, std::uint64_t n_samples, int bits,
                                          double amplitude_dbfs = kIdentAmplitudeDbfs);

// Uniformly distributed random codes (test utility for baseline comparisons).
std::vector<std::uint32_t> random_codes(std::uint64_t n_samples, int bits, std::uint64_t seed);

} // namespace daclin
