#pragma once

// End-to-end runs: mismatch draw -> identification capture -> model fit ->
// LUT -> two-tone evaluation, and the five-scenario comparison sweep.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "daclin/capture_chain.hpp"
#include "daclin/dac_core.hpp"
#include "daclin/dpd_lut.hpp"
#include "daclin/serialize.hpp"
#include "daclin/spectral.hpp"
#include "daclin/sysid.hpp"

namespace daclin {

struct IdentConfig {
    std::uint64_t n_samples = 65536;
    double freq_hz = kIdentFrequencyHz;
    double amplitude_dbfs = kIdentAmplitudeDbfs;
    int averages = 1;
};

struct EvalConfig {
    std::uint64_t n_samples = 65536;
    double center_hz = 3.15e9;
    double spacing_hz = 100e6;
    double dbfs_per_tone = -12.0;
    std::vector<double> sweep_centers_hz;     // defaults to 1..19 GHz, 2 GHz step
    std::vector<double> sweep_dbfs_per_tone;  // defaults to -12 and -18 dBFS/tone
};

struct RunConfig {
    DacConfig dac;
    double sigma_u = 0.005;
    std::uint64_t mismatch_seed = 42;
    MeasurementPathConfig path;
    AdcConfig adc; // full_scale is tied to the DAC
    std::uint64_t adc_seed = 1;
    std::uint64_t dem_seed = 7;
    IdentConfig ident;
    TrainConfig train;
    int poly_degree = 15;
    EvalConfig eval;
    std::string out_dir = "out";

    static RunConfig defaults();
    // Propagate shared fields (sample rate, ADC full scale) and validate.
    void finalize();
};

io::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const io::json& j, RunConfig base = RunConfig::defaults());

MismatchProfile make_mismatch(const RunConfig& cfg, bool ideal = false);
CaptureSetup capture_setup(const RunConfig& cfg, const MismatchProfile& mm);
Dataset identification_capture(const RunConfig& cfg, const MismatchProfile& mm);

struct FitReport {
    double final_mse = 0.0;
    std::size_t distinct_codes = 0;
    std::uint32_t min_code = 0;
    std::uint32_t max_code = 0;
    std::vector<std::uint32_t> uncovered_codes;
    double max_abs_residual = 0.0;  // per-code mean residual
    std::uint32_t max_residual_code = 0;
};

FitReport fit_report(const Model& model, const Dataset& ds);
io::json to_json(const FitReport& r);

// Compressed "a-b, c, d-e" listing of codes.
std::string code_ranges(const std::vector<std::uint32_t>& codes);

struct EvalResult {
    StimulusPlan plan;
    Spectrum spectrum;
    ImReport report;
    std::size_t clipped = 0;
};

// Two-tone evaluation. The periodic code record is played twice through
// DAC and lowpass and the second period is analysed, so the spectrum is the
// steady-state response without a filter start-up transient.
EvalResult evaluate(const RunConfig& cfg, const MismatchProfile& mm, const StimulusPlan& plan,
                    const Lut* lut, bool dem);
StimulusPlan eval_plan(const RunConfig& cfg, double center_hz, double dbfs_per_tone);

inline const std::vector<std::string> kScenarios = {"baseline", "dem", "poly_dpd", "nn_dpd", "oracle_dpd"};

struct ScenarioPoint {
    double center_hz = 0.0;
    double dbfs_per_tone = 0.0;
    ImReport report;
    std::optional<double> delta_im3_db, delta_im5_db, delta_im7_db; // baseline minus scenario
};

struct ComparisonReport {
    std::vector<std::pair<std::string, std::vector<ScenarioPoint>>> scenarios;
};

struct SweepLuts {
    Lut nn;
    Lut poly;
    Lut oracle;
};

ComparisonReport sweep(const RunConfig& cfg, const MismatchProfile& mm, const SweepLuts& luts);
io::json to_json(const ComparisonReport& r);
std::string scenario_csv(const std::vector<ScenarioPoint>& points);

} // namespace daclin
