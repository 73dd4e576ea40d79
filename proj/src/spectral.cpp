#include "daclin/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <set>

#include "daclin/error.hpp"

namespace daclin {

std::string to_string(Window w) { return w == Window::hann ? "hann" : "rectangular"; }

namespace {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
    void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};

double to_db(double linear_power) {
    if (!(linear_power > 0.0)) return kFloorDbfs;
    return std::max(kFloorDbfs, 10.0 * std::log10(linear_power));
}

double from_db(double db) { return db <= kFloorDbfs ? 0.0 : std::pow(10.0, db / 10.0); }

} // namespace

Spectrum power_spectrum(std::span<const double> waveform, double sample_rate, Window window,
                        double full_scale) {
    const std::size_t n = waveform.size();
    if (n < 4 || (n & (n - 1)) != 0) throw ArgumentError("spectrum length must be a power of two >= 4");
    if (!(full_scale > 0.0)) throw ArgumentError("full_scale must be positive");

    std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
    std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
    // FFTW_ESTIMATE plans deterministically, so the transform is reproducible.
    std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy> plan(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));

    double coherent_gain = 1.0;
    if (window == Window::hann) {
        coherent_gain = 0.5;
        for (std::size_t i = 0; i < n; ++i)
            in.get()[i] = waveform[i] * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / n));
    } else {
        std::copy(waveform.begin(), waveform.end(), in.get());
    }
    fftw_execute(plan.get());

    Spectrum s;
    s.n_samples = n;
    s.sample_rate = sample_rate;
    s.window = window;
    s.power_dbfs.resize(n / 2 + 1);
    const double norm = static_cast<double>(n) * coherent_gain * full_scale;
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const std::complex<double> x(out.get()[k][0], out.get()[k][1]);
        const double scale = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        const double amplitude = scale * std::abs(x) / norm;
        s.power_dbfs[k] = to_db(amplitude * amplitude);
    }
    return s;
}

double Spectrum::mean_square(double full_scale) const {
    const std::size_t last = power_dbfs.size() - 1;
    double acc = from_db(power_dbfs[0]) + from_db(power_dbfs[last]);
    for (std::size_t k = 1; k < last; ++k) acc += from_db(power_dbfs[k]) / 2.0;
    return acc * full_scale * full_scale;
}

std::uint64_t fold_bin(std::int64_t bin, std::uint64_t n_samples) {
    const auto n = static_cast<std::int64_t>(n_samples);
    std::int64_t k = bin % n;
    if (k < 0) k += n;
    if (k > n / 2) k = n - k;
    return static_cast<std::uint64_t>(k);
}

std::vector<std::uint64_t> im_bins(std::uint64_t k1, std::uint64_t k2, int order, std::uint64_t n_samples) {
    std::set<std::uint64_t> bins;
    const auto a1 = static_cast<std::int64_t>(k1);
    const auto a2 = static_cast<std::int64_t>(k2);
    for (int a = 1; a < order; ++a) {
        const int b = order - a;
        bins.insert(fold_bin(std::abs(a * a1 - b * a2), n_samples));
        bins.insert(fold_bin(a * a1 + b * a2, n_samples));
    }
    return {bins.begin(), bins.end()};
}

std::optional<double> ImReport::worst_im_dbc() const {
    std::optional<double> worst;
    for (const auto& v : {im3_dbc, im5_dbc, im7_dbc})
        if (v && (!worst || *v > *worst)) worst = v;
    return worst;
}

ImReport measure(const Spectrum& spectrum, const StimulusPlan& plan) {
    plan.validate();
    if (plan.n_samples != spectrum.n_samples)
        throw ArgumentError("stimulus plan and spectrum use different record lengths");
    const std::uint64_t n = spectrum.n_samples;
    const std::uint64_t half = n / 2;

    ImReport r;
    std::set<std::uint64_t> tone_bins;
    double mean_linear = 0.0;
    for (const auto& t : plan.tones) {
        const double p = spectrum.power_dbfs[t.bin];
        r.tone_power_dbfs.push_back(p);
        tone_bins.insert(t.bin);
        mean_linear += from_db(p);
    }
    mean_linear /= static_cast<double>(plan.tones.size());
    r.mean_tone_dbfs = to_db(mean_linear);

    if (plan.tones.size() >= 2) {
        const auto k1 = static_cast<std::int64_t>(plan.tones[0].bin);
        const auto k2 = static_cast<std::int64_t>(plan.tones[1].bin);
        for (int order : {3, 5, 7}) {
            std::set<std::uint64_t> bins;
            for (int a = 1; a < order; ++a) {
                const int b = order - a;
                for (std::int64_t raw : {std::abs(a * k1 - b * k2), a * k1 + b * k2})
                    if (raw > 0 && raw < static_cast<std::int64_t>(half)) bins.insert(static_cast<std::uint64_t>(raw));
            }
            std::vector<ProductLevel> levels;
            std::optional<double> worst;
            for (auto bin : bins) {
                if (tone_bins.count(bin))
                    throw AmbiguityError("IM" + std::to_string(order) + " product bin " + std::to_string(bin) +
                                         " coincides with a tone bin");
                const double p = spectrum.power_dbfs[bin];
                levels.push_back({bin, spectrum.bin_hz(bin), p});
                if (!worst || p > *worst) worst = p;
            }
            r.products[order] = std::move(levels);
            if (worst) {
                const double dbc = *worst - r.mean_tone_dbfs;
                if (order == 3) r.im3_dbc = dbc;
                if (order == 5) r.im5_dbc = dbc;
                if (order == 7) r.im7_dbc = dbc;
            }
        }
    }

    double spur = kFloorDbfs - 1.0;
    for (std::uint64_t k = 1; k <= half; ++k) {
        if (tone_bins.count(k)) continue;
        if (spectrum.power_dbfs[k] > spur) {
            spur = spectrum.power_dbfs[k];
            r.sfdr_spur_bin = k;
        }
    }
    r.sfdr_dbc = r.mean_tone_dbfs - spur;

    // products of every order up to 9, harmonics included
    std::set<std::uint64_t> excluded(tone_bins.begin(), tone_bins.end());
    excluded.insert(0);
    std::vector<std::int64_t> ks;
    for (const auto& t : plan.tones) ks.push_back(static_cast<std::int64_t>(t.bin));
    const std::int64_t k1 = ks[0];
    const std::int64_t k2 = ks.size() > 1 ? ks[1] : 0;
    for (int a = 0; a <= 9; ++a)
        for (int b = 0; a + b <= 9; ++b) {
            if (a + b == 0) continue;
            excluded.insert(fold_bin(a * k1 + b * k2, n));
            excluded.insert(fold_bin(a * k1 - b * k2, n));
        }
    std::vector<double> rest;
    rest.reserve(half);
    for (std::uint64_t k = 1; k <= half; ++k)
        if (!excluded.count(k)) rest.push_back(spectrum.power_dbfs[k]);
    if (!rest.empty()) {
        const auto mid = rest.begin() + static_cast<std::ptrdiff_t>(rest.size() / 2);
        std::nth_element(rest.begin(), mid, rest.end());
        double median = *mid;
        if (rest.size() % 2 == 0) {
            const double lower = *std::max_element(rest.begin(), mid);
            median = 0.5 * (lower + median);
        }
        r.noise_floor_dbfs_per_bin = median;
    } else {
        r.noise_floor_dbfs_per_bin = kFloorDbfs;
    }
    return r;
}

} // namespace daclin
