#include "daclin/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "daclin/error.hpp"
#include "daclin/rng.hpp"

namespace daclin {

void StimulusPlan::validate() const {
    if (n_samples < 4 || (n_samples & (n_samples - 1)) != 0)
        throw ArgumentError("n_samples must be a power of two >= 4");
    if (!(sample_rate > 0.0)) throw ArgumentError("sample_rate must be positive");
    if (tones.empty()) throw ArgumentError("stimulus plan has no tones");
    std::set<std::uint64_t> seen;
    for (const auto& t : tones) {
        if (t.bin % 2 == 0 || t.bin < 1 || t.bin > n_samples / 2 - 1)
            throw ArgumentError("tone bin " + std::to_string(t.bin) + " is not an odd in-band bin");
        if (!seen.insert(t.bin).second)
            throw ArgumentError("two tones snapped to the same bin " + std::to_string(t.bin));
        if (t.spec.amplitude_dbfs > 0.0) throw ArgumentError("tone amplitude must be <= 0 dBFS");
    }
}

std::uint64_t coherent_bin(double freq_hz, double sample_rate, std::uint64_t n_samples) {
    if (!(freq_hz > 0.0) || !(freq_hz < sample_rate / 2.0))
        throw ArgumentError("tone frequency " + std::to_string(freq_hz) + " Hz outside (0, Nyquist)");
    double exact = freq_hz * static_cast<double>(n_samples) / sample_rate;
    // absorb representation error so exact integer bins tie-break predictably
    if (std::abs(exact - std::round(exact)) < 1e-9) exact = std::round(exact);
    // nearest odd integer, ties toward the larger one
    auto k = static_cast<std::int64_t>(2.0 * std::floor((exact - 1.0) / 2.0 + 0.5) + 1.0);
    // n_samples / 2 - 1 is odd for any power of two >= 4
    k = std::clamp<std::int64_t>(k, 1, static_cast<std::int64_t>(n_samples / 2 - 1));
    return static_cast<std::uint64_t>(k);
}

StimulusPlan make_plan(std::uint64_t n_samples, double sample_rate, const std::vector<ToneSpec>& tones) {
    StimulusPlan plan;
    plan.n_samples = n_samples;
    plan.sample_rate = sample_rate;
    for (const auto& t : tones) {
        PlannedTone p;
        p.spec = t;
        p.bin = coherent_bin(t.freq_hz, sample_rate, n_samples);
        p.snapped_hz = static_cast<double>(p.bin) * sample_rate / static_cast<double>(n_samples);
        plan.tones.push_back(p);
    }
    plan.validate();
    return plan;
}

StimulusPlan two_tone_plan(double center_hz, double spacing_hz, double dbfs_per_tone,
                           std::uint64_t n_samples, double sample_rate) {
    return make_plan(n_samples, sample_rate,
                     {{center_hz - spacing_hz / 2.0, dbfs_per_tone, 0.0},
                      {center_hz + spacing_hz / 2.0, dbfs_per_tone, 0.0}});
}

namespace {

double code_amplitude(int bits) { return static_cast<double>((1U << bits) - 1U) / 2.0; }

std::vector<double> waveform(const StimulusPlan& plan, int bits, std::uint64_t length) {
    const double afs = code_amplitude(bits);
    std::vector<double> s(length, 0.0);
    for (const auto& t : plan.tones) {
        if (std::isinf(t.spec.amplitude_dbfs) && t.spec.amplitude_dbfs < 0) continue;
        const double amp = afs * std::pow(10.0, t.spec.amplitude_dbfs / 20.0);
        for (std::uint64_t n = 0; n < length; ++n) {
            // reduce k*n modulo N in integers to keep the phase exact
            const std::uint64_t cycle = (t.bin * n) % plan.n_samples;
            const double phase =
                2.0 * std::numbers::pi * static_cast<double>(cycle) / static_cast<double>(plan.n_samples);
            s[n] += amp * std::sin(phase + t.spec.phase_rad);
        }
    }
    return s;
}

} // namespace

std::vector<double> tone_waveform(const StimulusPlan& plan, int bits) {
    plan.validate();
    return waveform(plan, bits, plan.n_samples);
}

GeneratedCodes gen_codes(const StimulusPlan& plan, int bits, std::optional<std::uint64_t> length) {
    plan.validate();
    if (bits < 2 || bits > 16) throw ArgumentError("bits must be in [2, 16]");
    const double mid = plan.dc_offset_code.value_or(code_amplitude(bits));
    const double top = static_cast<double>((1U << bits) - 1U);
    const auto s = waveform(plan, bits, length.value_or(plan.n_samples));
    GeneratedCodes out;
    out.codes.resize(s.size());
    for (std::size_t n = 0; n < s.size(); ++n) {
        double c = std::round(mid + s[n]);
        if (c < 0.0 || c > top) {
            ++out.clipped;
            c = std::clamp(c, 0.0, top);
        }
        out.codes[n] = static_cast<std::uint32_t>(c);
    }
    return out;
}

StimulusPlan ident_plan(double sample_rate, std::uint64_t n_samples, double amplitude_dbfs) {
    return make_plan(n_samples, sample_rate, {{kIdentFrequencyHz, amplitude_dbfs, 0.0}});
}

std::vector<std::uint32_t> ident_stimulus(double sample_rate, std::uint64_t n_samples, int bits,
                                          double amplitude_dbfs) {
    return gen_codes(ident_plan(sample_rate, n_samples, amplitude_dbfs), bits).codes;
}

std::vector<std::uint32_t> random_codes(std::uint64_t n_samples, int bits, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint32_t> codes(n_samples);
    for (auto& c : codes) c = static_cast<std::uint32_t>(rng.below(std::uint64_t{1} << bits));
    return codes;
}

} // namespace daclin
