#pragma once

// Single-sided power spectra in dBFS and two-tone figures of merit.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "daclin/stimulus.hpp"

namespace daclin {

enum class Window { rectangular, hann };

std::string to_string(Window w);

inline constexpr double kFloorDbfs = -300.0;

struct Spectrum {
    std::uint64_t n_samples = 0;
    double sample_rate = 0.0;
    std::vector<double> power_dbfs; // N/2 + 1 bins, 0 dBFS = full-scale sine
    Window window = Window::rectangular;

    double bin_hz(std::uint64_t k) const { return static_cast<double>(k) * sample_rate / static_cast<double>(n_samples); }
    // Mean-square of the time waveform implied by the spectrum (Parseval).
    double mean_square(double full_scale) const;
};

// full_scale: amplitude of a 0 dBFS sine in waveform units.
Spectrum power_spectrum(std::span<const double> waveform, double sample_rate, Window window,
                        double full_scale);

std::uint64_t fold_bin(std::int64_t bin, std::uint64_t n_samples);

// Folded bins |a k1 +/- b k2|, a + b = order, a, b >= 1; sorted, unique.
std::vector<std::uint64_t> im_bins(std::uint64_t k1, std::uint64_t k2, int order, std::uint64_t n_samples);

struct ProductLevel {
    std::uint64_t bin = 0;
    double freq_hz = 0.0;
    double power_dbfs = 0.0;
};

struct ImReport {
    std::vector<double> tone_power_dbfs;
    double mean_tone_dbfs = 0.0;
    std::optional<double> im3_dbc, im5_dbc, im7_dbc;
    double sfdr_dbc = 0.0;
    std::uint64_t sfdr_spur_bin = 0;
    double noise_floor_dbfs_per_bin = 0.0;
    std::map<int, std::vector<ProductLevel>> products;

    // Largest of the reported IM3/IM5/IM7 levels.
    std::optional<double> worst_im_dbc() const;
};

// IMn is the largest in-band product (unfolded bin below Nyquist) of order n,
// in dBc relative to the mean tone power.
ImReport measure(const Spectrum& spectrum, const StimulusPlan& plan);

} // namespace daclin
