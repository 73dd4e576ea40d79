#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "daclin/capture_chain.hpp"
#include "daclin/error.hpp"
#include "daclin/stimulus.hpp"

using namespace daclin;

namespace {

MeasurementPathConfig path(int order = 2) {
    MeasurementPathConfig p;
    p.filter_order = order;
    return p;
}

double db(double g) { return 20.0 * std::log10(g); }

// Least-squares amplitude of a known-frequency sinusoid over a record tail.
double fitted_amplitude(const std::vector<double>& y, double f_norm, std::size_t from) {
    double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
    for (std::size_t n = from; n < y.size(); ++n) {
        const double s = std::sin(2 * std::numbers::pi * f_norm * n);
        const double c = std::cos(2 * std::numbers::pi * f_norm * n);
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += y[n] * s;
        yc += y[n] * c;
    }
    const double det = ss * cc - sc * sc;
    const double a = (ys * cc - yc * sc) / det;
    const double b = (yc * ss - ys * sc) / det;
    return std::hypot(a, b);
}

CaptureSetup ideal_setup() {
    CaptureSetup s;
    s.mismatch = MismatchProfile::zero(s.dac);
    s.adc.full_scale = s.dac.full_scale();
    return s;
}

} // namespace

TEST(Butterworth, SecondOrderMatchesReferenceDesign) {
    // reference: scipy.signal.butter(2, 20e9, fs=40.96e9, output='sos')
    const auto chain = design_butterworth(path(2));
    ASSERT_EQ(chain.sections.size(), 1u);
    const auto& s = chain.sections[0];
    EXPECT_NEAR(s.b0, 0.9492662926424377, 1e-13);
    EXPECT_NEAR(s.b1, 1.8985325852848753, 1e-13);
    EXPECT_NEAR(s.b2, 0.9492662926424377, 1e-13);
    EXPECT_NEAR(s.a1, 1.8959570178357115, 1e-13);
    EXPECT_NEAR(s.a2, 0.9011081527340397, 1e-13);
}

TEST(Butterworth, ResponseMatchesReferenceAllOrders) {
    // scipy.signal.sosfreqz of the reference designs at 100 MHz, 5 GHz, 20 GHz
    const double want[4][3] = {
        {-3.4660597844283547e-07, -0.0009589948922363043, -3.0102999566398125},
        {-2.892982399659866e-14, -2.1180888158065242e-07, -3.010299956639923},
        {0.0, -4.677373943782657e-11, -3.0102999566398045},
        {-9.643274665532871e-16, -9.643274665532877e-15, -3.0102999566399244},
    };
    const double freqs[3] = {100e6, 5e9, 20e9};
    for (int order = 1; order <= 4; ++order) {
        const auto chain = design_butterworth(path(order));
        for (int i = 0; i < 3; ++i)
            EXPECT_NEAR(db(std::abs(chain.response(freqs[i], 40.96e9))), want[order - 1][i], 1e-9)
                << "order " << order << " f " << freqs[i];
    }
}

TEST(Butterworth, GainAtCutoffAndDc) {
    for (int order = 1; order <= 4; ++order) {
        const auto chain = design_butterworth(path(order));
        EXPECT_NEAR(std::abs(chain.response(20e9, 40.96e9)), 1.0 / std::sqrt(2.0), 1e-6 / std::sqrt(2.0));
        EXPECT_NEAR(chain.dc_gain(), 1.0, 1e-12);
    }
    const auto two = design_butterworth(path(2));
    EXPECT_NEAR(db(std::abs(two.response(20e9, 40.96e9))), -3.0103, 0.001);
    EXPECT_GT(db(std::abs(two.response(100e6, 40.96e9))), -0.001);
}

TEST(Butterworth, CutoffAtOrAboveNyquistFails) {
    auto p = path(2);
    p.cutoff_hz = 20.48e9;
    EXPECT_THROW(design_butterworth(p), DesignError);
    p.filter_order = 5;
    p.cutoff_hz = 1e9;
    EXPECT_THROW(design_butterworth(p), ConfigError);
}

TEST(FilterApply, ConstantInputSettlesToInput) {
    const auto chain = design_butterworth(path(2));
    const std::vector<double> in(4000, 0.37);
    const auto out = filter_apply(chain, in);
    ASSERT_EQ(out.size(), in.size());
    for (std::size_t n = 2000; n < out.size(); ++n) ASSERT_NEAR(out[n], 0.37, 1e-9);
}

TEST(FilterApply, ImpulseResponseSumsToOne) {
    for (int order = 1; order <= 4; ++order) {
        std::vector<double> in(20000, 0.0);
        in[0] = 1.0;
        const auto h = filter_apply(design_butterworth(path(order)), in);
        double sum = 0.0;
        for (double v : h) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-9);
    }
}

TEST(FilterApply, SineAtCutoffIsHalfPower) {
    const auto chain = design_butterworth(path(2));
    const double f_norm = 20e9 / 40.96e9;
    std::vector<double> in(16384);
    for (std::size_t n = 0; n < in.size(); ++n) in[n] = std::sin(2 * std::numbers::pi * f_norm * n);
    const auto out = filter_apply(chain, in);
    EXPECT_NEAR(fitted_amplitude(out, f_norm, 4096), 0.7071, 1e-3);
}

TEST(FilterApply, LowFrequencyToneIsTransparent) {
    const auto chain = design_butterworth(path(2));
    const double f_norm = 100.625e6 / 40.96e9;
    std::vector<double> in(16384);
    for (std::size_t n = 0; n < in.size(); ++n) in[n] = std::sin(2 * std::numbers::pi * f_norm * n);
    const auto out = filter_apply(chain, in);
    EXPECT_GT(db(fitted_amplitude(out, f_norm, 4096)), -0.001);
}

TEST(FilterApply, Linearity) {
    const auto chain = design_butterworth(path(3));
    std::vector<double> u(3000), v(3000), mix(3000);
    for (std::size_t n = 0; n < u.size(); ++n) {
        u[n] = std::sin(0.01 * n * n);
        v[n] = std::cos(0.3 * n) + 0.1 * (n % 7);
        mix[n] = 2.5 * u[n] - 0.75 * v[n];
    }
    const auto fu = filter_apply(chain, u);
    const auto fv = filter_apply(chain, v);
    const auto fm = filter_apply(chain, mix);
    for (std::size_t n = 0; n < u.size(); ++n)
        ASSERT_NEAR(fm[n], 2.5 * fu[n] - 0.75 * fv[n], 1e-10 * (1.0 + std::abs(fm[n])));
}

TEST(AdcQuantize, LevelsAreReproduced) {
    AdcConfig adc;
    adc.bits = 10;
    adc.full_scale = 1023.0;
    std::vector<double> in;
    for (int k = 0; k < 1024; ++k) in.push_back(-1023.0 + 2.0 * k);
    const auto out = adc_quantize(in, adc, 0);
    for (int k = 0; k < 1024; ++k) ASSERT_NEAR(out[k], in[k] / 1023.0, 1e-15);
}

TEST(AdcQuantize, ClampsAtRails) {
    AdcConfig adc;
    adc.full_scale = 1023.0;
    const std::vector<double> in = {5000.0, -5000.0, 1024.5};
    const auto out = adc_quantize(in, adc, 0);
    EXPECT_EQ(out[0], 1.0);
    EXPECT_EQ(out[1], -1.0);
    EXPECT_EQ(out[2], 1.0);
}

TEST(AdcQuantize, FullScaleRampHitsEveryLevel) {
    AdcConfig adc;
    adc.full_scale = 1023.0;
    std::vector<double> ramp(100000);
    for (std::size_t n = 0; n < ramp.size(); ++n) ramp[n] = -1023.0 + 2046.0 * n / (ramp.size() - 1);
    const auto out = adc_quantize(ramp, adc, 0);
    EXPECT_EQ(std::set<double>(out.begin(), out.end()).size(), 1024u);
}

TEST(AdcQuantize, Monotone) {
    AdcConfig adc;
    adc.bits = 6;
    adc.full_scale = 2.0;
    std::vector<double> in(5000);
    for (std::size_t n = 0; n < in.size(); ++n) in[n] = -2.5 + 5.0 * n / in.size();
    const auto out = adc_quantize(in, adc, 0);
    EXPECT_TRUE(std::is_sorted(out.begin(), out.end()));
}

TEST(AdcQuantize, NoiseIsSeeded) {
    AdcConfig adc;
    adc.full_scale = 1023.0;
    adc.noise_rms_lsb = 0.25;
    std::vector<double> in(2000, 10.3);
    EXPECT_EQ(adc_quantize(in, adc, 4), adc_quantize(in, adc, 4));
    EXPECT_NE(adc_quantize(in, adc, 4), adc_quantize(in, adc, 5));
}

TEST(Capture, ConstantCodesGiveConstantOutput) {
    const auto setup = ideal_setup();
    const std::vector<std::uint32_t> codes(1000, 700);
    const auto ds = capture(codes, setup);
    ASSERT_EQ(ds.size(), 1000u - kCaptureWarmup);
    EXPECT_EQ(ds.index.front(), kCaptureWarmup);
    for (double y : ds.y) ASSERT_EQ(y, ds.y.front());
    EXPECT_DOUBLE_EQ(ds.y.front(), (2.0 * 700 - 1023.0) / 1023.0);
}

TEST(Capture, IdealSlowSineIsAMemorylessStaircase) {
    const auto setup = ideal_setup();
    const auto codes = ident_stimulus(40.96e9, 65536, 10);
    const auto ds = capture(codes, setup);
    const auto means = per_code_mean(ds);
    double ss = 0.0;
    for (std::size_t n = 0; n < ds.size(); ++n) ss += (ds.y[n] - means[ds.x[n]]) * (ds.y[n] - means[ds.x[n]]);
    const double lsb = 2.0 / 1023.0;
    EXPECT_LE(std::sqrt(ss / ds.size()), lsb);
    // per-code means increase with the code
    double prev = -2.0;
    for (double m : means)
        if (!std::isnan(m)) {
            EXPECT_GE(m, prev);
            prev = m;
        }
}

TEST(Capture, LowFrequencyTransparency) {
    // f <= fs/200: filtered capture within one LSB of direct quantization
    auto setup = ideal_setup();
    for (double f : {50e6, 100e6, 204.8e6}) {
        const auto plan = make_plan(16384, 40.96e9, {{f, -0.5, 0.3}});
        const auto codes = gen_codes(plan, 10).codes;
        const auto ds = capture(codes, setup);
        DemState off;
        const auto direct = adc_quantize(convert(codes, setup.dac, setup.mismatch, off), setup.adc, 0);
        for (std::size_t i = 0; i < ds.size(); ++i)
            ASSERT_LE(std::abs(ds.y[i] - direct[ds.index[i]]), 2.0 / 1023.0 + 1e-12) << "f=" << f << " n=" << i;
    }
}

TEST(Capture, Deterministic) {
    auto setup = ideal_setup();
    setup.mismatch = draw_mismatch(setup.dac, 0.005, 42);
    setup.adc.noise_rms_lsb = 0.25;
    setup.adc_seed = 17;
    setup.dem = true;
    const auto codes = ident_stimulus(40.96e9, 8192, 10);
    const auto a = capture(codes, setup);
    const auto b = capture(codes, setup);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.metadata_json, b.metadata_json);
}

TEST(Capture, AveragingStaysInRange) {
    auto setup = ideal_setup();
    setup.adc.noise_rms_lsb = 2.0;
    setup.averages = 4;
    const auto ds = capture(ident_stimulus(40.96e9, 4096, 10), setup);
    EXPECT_NO_THROW(ds.validate());
}

TEST(Capture, InconsistentConfigsRejected) {
    auto setup = ideal_setup();
    setup.adc.full_scale = 1000.0;
    const std::vector<std::uint32_t> codes(200, 1);
    EXPECT_THROW(capture(codes, setup), ConfigError);
    setup = ideal_setup();
    setup.path.sample_rate = 20e9;
    EXPECT_THROW(capture(codes, setup), ConfigError);
}
