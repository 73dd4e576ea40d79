#include "daclin/pipeline.hpp"

#include <cmath>
#include <set>

#include "daclin/error.hpp"
#include "daclin/stimulus.hpp"

namespace daclin {

RunConfig RunConfig::defaults() {
    RunConfig cfg;
    for (int g = 1; g <= 19; g += 2) cfg.eval.sweep_centers_hz.push_back(g * 1e9);
    cfg.eval.sweep_dbfs_per_tone = {-12.0, -18.0};
    cfg.finalize();
    return cfg;
}

void RunConfig::finalize() {
    dac.validate();
    path.sample_rate = dac.sample_rate;
    adc.full_scale = dac.full_scale();
    path.validate();
    adc.validate();
    train.validate();
    if (!(sigma_u >= 0.0)) throw ConfigError("sigma_u must be >= 0");
    if (ident.averages < 1) throw ConfigError("ident.averages must be >= 1");
    if (poly_degree < 0) throw ConfigError("poly_degree must be >= 0");
}

io::json to_json(const RunConfig& c) {
    io::json j;
    j["dac"] = {{"bits", c.dac.bits},
                {"unit_current", c.dac.unit_current},
                {"seg_bits", c.dac.seg_bits},
                {"sample_rate", c.dac.sample_rate},
                {"sigma_u", c.sigma_u},
                {"seed", c.mismatch_seed}};
    j["path"] = {{"filter_order", c.path.filter_order}, {"cutoff_hz", c.path.cutoff_hz}};
    j["adc"] = {{"bits", c.adc.bits}, {"noise_rms_lsb", c.adc.noise_rms_lsb}, {"seed", c.adc_seed}};
    j["dem"] = {{"seed", c.dem_seed}};
    j["ident"] = {{"n_samples", c.ident.n_samples},
                  {"freq_hz", c.ident.freq_hz},
                  {"amplitude_dbfs", c.ident.amplitude_dbfs},
                  {"averages", c.ident.averages}};
    j["train"] = {{"lr", c.train.lr},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"eps", c.train.eps},
                  {"batch_size", c.train.batch_size},
                  {"epochs", c.train.epochs},
                  {"seed", c.train.seed},
                  {"hidden", c.train.hidden}};
    j["poly"] = {{"degree", c.poly_degree}};
    j["eval"] = {{"n_samples", c.eval.n_samples},
                 {"center_hz", c.eval.center_hz},
                 {"spacing_hz", c.eval.spacing_hz},
                 {"dbfs_per_tone", c.eval.dbfs_per_tone},
                 {"sweep_centers_hz", c.eval.sweep_centers_hz},
                 {"sweep_dbfs_per_tone", c.eval.sweep_dbfs_per_tone}};
    j["out_dir"] = c.out_dir;
    return j;
}

namespace {

template <typename T>
void take(const io::json& j, const char* section, const char* key, T& field) {
    if (!j.contains(section)) return;
    const auto& s = j.at(section);
    if (s.contains(key)) field = s.at(key).get<T>();
}

} // namespace

RunConfig run_config_from_json(const io::json& j, RunConfig c) {
    try {
        static const std::set<std::string> known = {"dac", "path", "adc", "dem", "ident", "train", "poly", "eval", "out_dir"};
        for (const auto& [key, value] : j.items())
            if (!known.count(key)) throw ConfigError("unknown config section '" + key + "'");
        take(j, "dac", "bits", c.dac.bits);
        take(j, "dac", "unit_current", c.dac.unit_current);
        take(j, "dac", "seg_bits", c.dac.seg_bits);
        take(j, "dac", "sample_rate", c.dac.sample_rate);
        take(j, "dac", "sigma_u", c.sigma_u);
        take(j, "dac", "seed", c.mismatch_seed);
        take(j, "path", "filter_order", c.path.filter_order);
        take(j, "path", "cutoff_hz", c.path.cutoff_hz);
        take(j, "adc", "bits", c.adc.bits);
        take(j, "adc", "noise_rms_lsb", c.adc.noise_rms_lsb);
        take(j, "adc", "seed", c.adc_seed);
        take(j, "dem", "seed", c.dem_seed);
        take(j, "ident", "n_samples", c.ident.n_samples);
        take(j, "ident", "freq_hz", c.ident.freq_hz);
        take(j, "ident", "amplitude_dbfs", c.ident.amplitude_dbfs);
        take(j, "ident", "averages", c.ident.averages);
        take(j, "train", "lr", c.train.lr);
        take(j, "train", "beta1", c.train.beta1);
        take(j, "train", "beta2", c.train.beta2);
        take(j, "train", "eps", c.train.eps);
        take(j, "train", "batch_size", c.train.batch_size);
        take(j, "train", "epochs", c.train.epochs);
        take(j, "train", "seed", c.train.seed);
        take(j, "train", "hidden", c.train.hidden);
        take(j, "poly", "degree", c.poly_degree);
        take(j, "eval", "n_samples", c.eval.n_samples);
        take(j, "eval", "center_hz", c.eval.center_hz);
        take(j, "eval", "spacing_hz", c.eval.spacing_hz);
        take(j, "eval", "dbfs_per_tone", c.eval.dbfs_per_tone);
        take(j, "eval", "sweep_centers_hz", c.eval.sweep_centers_hz);
        take(j, "eval", "sweep_dbfs_per_tone", c.eval.sweep_dbfs_per_tone);
        if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    } catch (const io::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.finalize();
    return c;
}

MismatchProfile make_mismatch(const RunConfig& cfg, bool ideal) {
    if (ideal) {
        MismatchProfile mm = MismatchProfile::zero(cfg.dac);
        mm.seed = cfg.mismatch_seed;
        return mm;
    }
    return draw_mismatch(cfg.dac, cfg.sigma_u, cfg.mismatch_seed);
}

CaptureSetup capture_setup(const RunConfig& cfg, const MismatchProfile& mm) {
    CaptureSetup s;
    s.dac = cfg.dac;
    s.mismatch = mm;
    s.path = cfg.path;
    s.adc = cfg.adc;
    s.adc_seed = cfg.adc_seed;
    s.dem_seed = cfg.dem_seed;
    s.averages = cfg.ident.averages;
    return s;
}

Dataset identification_capture(const RunConfig& cfg, const MismatchProfile& mm) {
    const StimulusPlan plan = make_plan(cfg.ident.n_samples, cfg.dac.sample_rate,
                                        {{cfg.ident.freq_hz, cfg.ident.amplitude_dbfs, 0.0}});
    const auto codes = gen_codes(plan, cfg.dac.bits).codes;
    Dataset ds = capture(codes, capture_setup(cfg, mm));
    auto meta = io::json::parse(ds.metadata_json);
    meta["stimulus"] = io::to_json(plan);
    ds.metadata_json = meta.dump();
    return ds;
}

FitReport fit_report(const Model& model, const Dataset& ds) {
    FitReport r;
    r.final_mse = mse_loss(model, ds);
    const auto means = per_code_mean(ds);
    bool first = true;
    for (std::uint32_t code = 0; code < means.size(); ++code) {
        if (std::isnan(means[code])) {
            r.uncovered_codes.push_back(code);
            continue;
        }
        ++r.distinct_codes;
        if (first) r.min_code = code;
        r.max_code = code;
        first = false;
        const double res = std::abs(model_eval(model, code) - means[code]);
        if (res > r.max_abs_residual) {
            r.max_abs_residual = res;
            r.max_residual_code = code;
        }
    }
    return r;
}

io::json to_json(const FitReport& r) {
    io::json j;
    j["final_mse"] = r.final_mse;
    j["distinct_codes"] = r.distinct_codes;
    j["min_code"] = r.min_code;
    j["max_code"] = r.max_code;
    j["uncovered_codes"] = code_ranges(r.uncovered_codes);
    j["max_abs_residual"] = r.max_abs_residual;
    j["max_residual_code"] = r.max_residual_code;
    return j;
}

std::string code_ranges(const std::vector<std::uint32_t>& codes) {
    std::string out;
    for (std::size_t i = 0; i < codes.size();) {
        std::size_t j = i;
        while (j + 1 < codes.size() && codes[j + 1] == codes[j] + 1) ++j;
        if (!out.empty()) out += ", ";
        out += std::to_string(codes[i]);
        if (j > i) out += "-" + std::to_string(codes[j]);
        i = j + 1;
    }
    return out;
}

StimulusPlan eval_plan(const RunConfig& cfg, double center_hz, double dbfs_per_tone) {
    return two_tone_plan(center_hz, cfg.eval.spacing_hz, dbfs_per_tone, cfg.eval.n_samples, cfg.dac.sample_rate);
}

EvalResult evaluate(const RunConfig& cfg, const MismatchProfile& mm, const StimulusPlan& plan,
                    const Lut* lut, bool dem) {
    EvalResult r;
    r.plan = plan;
    const auto generated = gen_codes(plan, cfg.dac.bits, 2 * plan.n_samples);
    r.clipped = generated.clipped / 2;
    std::vector<std::uint32_t> codes = generated.codes;
    if (lut) {
        if (lut->bits != cfg.dac.bits)
            throw ConfigError("LUT has " + std::to_string(lut->bits) + " bits, DAC has " + std::to_string(cfg.dac.bits));
        codes = apply_lut(*lut, codes);
    }
    DemState state(dem, cfg.dem_seed);
    const auto analog = convert(codes, cfg.dac, mm, state);
    const auto filtered = filter_apply(design_butterworth(cfg.path), analog);
    const std::span<const double> period(filtered.data() + plan.n_samples, plan.n_samples);
    r.spectrum = power_spectrum(period, cfg.dac.sample_rate, Window::rectangular, cfg.dac.full_scale());
    r.report = measure(r.spectrum, plan);
    return r;
}

ComparisonReport sweep(const RunConfig& cfg, const MismatchProfile& mm, const SweepLuts& luts) {
    ComparisonReport out;
    for (const auto& name : kScenarios) out.scenarios.push_back({name, {}});
    for (double level : cfg.eval.sweep_dbfs_per_tone) {
        for (double center : cfg.eval.sweep_centers_hz) {
            const StimulusPlan plan = eval_plan(cfg, center, level);
            const EvalResult base = evaluate(cfg, mm, plan, nullptr, false);
            for (auto& [name, points] : out.scenarios) {
                EvalResult res;
                if (name == "baseline") res = base;
                else if (name == "dem") res = evaluate(cfg, mm, plan, nullptr, true);
                else if (name == "poly_dpd") res = evaluate(cfg, mm, plan, &luts.poly, false);
                else if (name == "nn_dpd") res = evaluate(cfg, mm, plan, &luts.nn, false);
                else res = evaluate(cfg, mm, plan, &luts.oracle, false);
                ScenarioPoint p;
                p.center_hz = center;
                p.dbfs_per_tone = level;
                p.report = res.report;
                auto delta = [](const std::optional<double>& b, const std::optional<double>& s) -> std::optional<double> {
                    if (b && s) return *b - *s;
                    return std::nullopt;
                };
                p.delta_im3_db = delta(base.report.im3_dbc, res.report.im3_dbc);
                p.delta_im5_db = delta(base.report.im5_dbc, res.report.im5_dbc);
                p.delta_im7_db = delta(base.report.im7_dbc, res.report.im7_dbc);
                points.push_back(std::move(p));
            }
        }
    }
    return out;
}

io::json to_json(const ComparisonReport& r) {
    io::json j;
    j["note"] = "simulation only: the behavioral model has no dynamic errors, so DPD gains do not roll off "
                "with frequency the way hardware measurements do";
    auto opt = [](const std::optional<double>& v) { return v ? io::json(*v) : io::json(nullptr); };
    io::json scen = io::json::object();
    for (const auto& [name, points] : r.scenarios) {
        io::json arr = io::json::array();
        for (const auto& p : points)
            arr.push_back({{"center_hz", p.center_hz},
                           {"dbfs_per_tone", p.dbfs_per_tone},
                           {"report", io::to_json(p.report)},
                           {"delta_vs_baseline_db", {{"im3", opt(p.delta_im3_db)}, {"im5", opt(p.delta_im5_db)}, {"im7", opt(p.delta_im7_db)}}}});
        scen[name] = arr;
    }
    j["scenarios"] = scen;
    return j;
}

std::string scenario_csv(const std::vector<ScenarioPoint>& points) {
    std::string out = "center_hz,dbfs_per_tone,im3_dbc,im5_dbc,im7_dbc,sfdr_dbc,noise_floor_dbfs_per_bin\n";
    auto cell = [](const std::optional<double>& v) { return v ? io::format_real(*v) : std::string(); };
    for (const auto& p : points)
        out += io::format_real(p.center_hz) + "," + io::format_real(p.dbfs_per_tone) + "," + cell(p.report.im3_dbc) + "," +
               cell(p.report.im5_dbc) + "," + cell(p.report.im7_dbc) + "," + io::format_real(p.report.sfdr_dbc) + "," +
               io::format_real(p.report.noise_floor_dbfs_per_bin) + "\n";
    return out;
}

} // namespace daclin
