// daclin: simulate a mismatched current-steering DAC, identify its static
// transfer characteristic, build a pre-distortion LUT and evaluate two-tone
// intermodulation against DEM and polynomial baselines.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "daclin/error.hpp"
#include "daclin/kernels.hpp"
#include "daclin/pipeline.hpp"
#include "daclin/serialize.hpp"

namespace fs = std::filesystem;
using namespace daclin;
using io::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string model = "mlp";
    std::string lut_path;
    bool dem = false;
    bool ideal = false;
    std::optional<int> avg;
    std::string out_dir;
    bool print_config = false;
};

RunConfig load_config(const Options& opt) {
    RunConfig cfg = RunConfig::defaults();
    if (const char* env = std::getenv("DACLIN_OUT")) cfg.out_dir = env;
    if (!opt.config_path.empty()) cfg = run_config_from_json(json::parse(io::read_text(opt.config_path)), cfg);
    if (opt.seed) cfg.mismatch_seed = *opt.seed;
    if (opt.avg) cfg.ident.averages = *opt.avg;
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    cfg.finalize();
    return cfg;
}

// Every JSON artifact carries the effective config and its digest. The output
// directory is left out so artifacts do not depend on where they are written.
json with_provenance(json body, const RunConfig& cfg) {
    json c = to_json(cfg);
    c.erase("out_dir");
    body["config_digest"] = io::digest(c);
    body["config"] = c;
    return body;
}

void write_config_echo(const RunConfig& cfg) {
    io::write_text_atomic(fs::path(cfg.out_dir) / "config.json", with_provenance(json::object(), cfg).dump(2) + "\n");
}

Model load_model(const RunConfig& cfg, const std::string& type) {
    const fs::path path = fs::path(cfg.out_dir) / ("model_" + type + ".json");
    return io::model_from_json(json::parse(io::read_text(path)));
}

int cmd_simulate(const RunConfig& cfg, const Options& opt) {
    const MismatchProfile mm = make_mismatch(cfg, opt.ideal);
    const fs::path out(cfg.out_dir);
    io::write_text_atomic(out / "mismatch.json", with_provenance(io::to_json(mm), cfg).dump(2) + "\n");
    io::write_text_atomic(out / "transfer.csv", io::transfer_csv(transfer_table(cfg.dac, mm)));
    write_config_echo(cfg);
    std::printf("wrote %s (%u codes, sigma_u=%g, seed=%llu)\n", (out / "transfer.csv").c_str(), cfg.dac.code_count(),
                mm.sigma_u, static_cast<unsigned long long>(mm.seed));
    return 0;
}

int cmd_identify(const RunConfig& cfg, const Options& opt) {
    const MismatchProfile mm = make_mismatch(cfg, opt.ideal);
    const Dataset ds = identification_capture(cfg, mm);
    const fs::path out(cfg.out_dir);
    io::write_text_atomic(out / "dataset.csv", io::dataset_csv(ds));
    io::write_text_atomic(out / "dataset.meta.json",
                          with_provenance(json::parse(ds.metadata_json), cfg).dump(2) + "\n");

    Model model;
    if (opt.model == "mlp") {
        const TrainResult tr = train_mlp(ds, cfg.train);
        model = tr.model;
        io::write_text_atomic(out / "loss_mlp.csv", io::loss_csv(tr.loss_history));
        std::printf("trained MLP H=%d on %zu samples (%s kernels): loss %.6g -> %.6g\n", cfg.train.hidden, ds.size(),
                    std::string(kernels::isa_name(kernels::active_kernels().isa)).c_str(), tr.loss_history.front(),
                    tr.loss_history.back());
    } else {
        model = fit_polynomial(ds, cfg.poly_degree);
        std::printf("fitted degree-%d polynomial on %zu samples\n", cfg.poly_degree, ds.size());
    }
    const FitReport report = fit_report(model, ds);
    json model_json = io::to_json(model);
    model_json["coverage"] = {{"distinct_codes", report.distinct_codes},
                              {"uncovered_codes", report.uncovered_codes}};
    io::write_text_atomic(out / ("model_" + opt.model + ".json"), with_provenance(model_json, cfg).dump() + "\n");
    io::write_text_atomic(out / ("fit_report_" + opt.model + ".json"),
                          with_provenance(daclin::to_json(report), cfg).dump(2) + "\n");
    write_config_echo(cfg);
    std::printf("final MSE %.6g, %zu distinct codes covered, max per-code residual %.3g at code %u\n",
                report.final_mse, report.distinct_codes, report.max_abs_residual, report.max_residual_code);
    return 0;
}

int cmd_build_lut(const RunConfig& cfg, const Options& opt) {
    const fs::path out(cfg.out_dir);
    TransferEstimate est;
    if (opt.model == "oracle") {
        est = tabulate_oracle(cfg.dac, make_mismatch(cfg, opt.ideal));
    } else {
        const fs::path model_path = out / ("model_" + opt.model + ".json");
        const json mj = json::parse(io::read_text(model_path));
        est = tabulate(io::model_from_json(mj), cfg.dac.bits);
        if (mj.contains("coverage")) {
            const auto uncovered = mj["coverage"]["uncovered_codes"].get<std::vector<std::uint32_t>>();
            if (!uncovered.empty())
                std::fprintf(stderr, "warning: %zu codes were not seen during identification; their LUT entries "
                                     "follow model extrapolation: %s\n",
                             uncovered.size(), code_ranges(uncovered).c_str());
        }
    }
    const LinearTarget target = fit_linear_target(est);
    if (!target.increasing)
        std::fprintf(stderr, "warning: fitted target line has non-positive gain %g\n", target.gain);
    const Lut lut = build_lut(est, target);
    io::write_text_atomic(out / ("lut_" + opt.model + ".json"), with_provenance(io::to_json(lut), cfg).dump() + "\n");
    io::write_text_atomic(out / ("lut_" + opt.model + ".csv"), io::lut_csv(lut));
    std::printf("LUT from %s estimate: %zu of %zu entries differ from identity\n", opt.model.c_str(),
                lut.identity_deviations(), lut.entries.size());
    return 0;
}

void print_report(const char* label, const ImReport& r) {
    auto v = [](const std::optional<double>& x) { return x ? *x : std::nan(""); };
    std::printf("%-12s IM3 %8.2f dBc  IM5 %8.2f dBc  IM7 %8.2f dBc  SFDR %7.2f dBc  floor %8.2f dBFS/bin\n", label,
                v(r.im3_dbc), v(r.im5_dbc), v(r.im7_dbc), r.sfdr_dbc, r.noise_floor_dbfs_per_bin);
}

int cmd_evaluate(const RunConfig& cfg, const Options& opt) {
    const MismatchProfile mm = make_mismatch(cfg, opt.ideal);
    std::optional<Lut> lut;
    if (!opt.lut_path.empty()) lut = io::lut_from_json(json::parse(io::read_text(opt.lut_path)));
    const StimulusPlan plan = eval_plan(cfg, cfg.eval.center_hz, cfg.eval.dbfs_per_tone);
    const EvalResult base = evaluate(cfg, mm, plan, nullptr, false);
    const EvalResult res = evaluate(cfg, mm, plan, lut ? &*lut : nullptr, opt.dem);

    std::string label = opt.ideal ? "ideal" : "mismatch";
    if (lut) label += "_lut";
    if (opt.dem) label += "_dem";
    const fs::path out(cfg.out_dir);
    io::write_text_atomic(out / ("spectrum_" + label + ".csv"), io::spectrum_csv(res.spectrum));
    json body;
    body["label"] = label;
    body["plan"] = io::to_json(plan);
    body["clipped_samples"] = res.clipped;
    body["report"] = io::to_json(res.report);
    if (lut) body["lut"] = opt.lut_path;
    io::write_text_atomic(out / ("im_report_" + label + ".json"), with_provenance(body, cfg).dump(2) + "\n");

    std::printf("tones %.6f / %.6f GHz at %.1f dBFS/tone, N=%llu\n", plan.tones[0].snapped_hz / 1e9,
                plan.tones[1].snapped_hz / 1e9, cfg.eval.dbfs_per_tone,
                static_cast<unsigned long long>(plan.n_samples));
    print_report("no DPD", base.report);
    if (lut || opt.dem) {
        print_report(label.c_str(), res.report);
        auto d = [](const std::optional<double>& a, const std::optional<double>& b) {
            return (a && b) ? *a - *b : std::nan("");
        };
        std::printf("improvement  IM3 %+.2f dB  IM5 %+.2f dB  IM7 %+.2f dB\n", d(base.report.im3_dbc, res.report.im3_dbc),
                    d(base.report.im5_dbc, res.report.im5_dbc), d(base.report.im7_dbc, res.report.im7_dbc));
    }
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const Options& opt) {
    const fs::path out(cfg.out_dir);
    json manifest;
    manifest["completed"] = json::array();
    try {
        const MismatchProfile mm = make_mismatch(cfg, opt.ideal);
        const Dataset ds = identification_capture(cfg, mm);
        SweepLuts luts;
        const TrainResult tr = train_mlp(ds, cfg.train);
        {
            const TransferEstimate est = tabulate(Model{tr.model}, cfg.dac.bits);
            luts.nn = build_lut(est, fit_linear_target(est));
        }
        manifest["completed"].push_back("nn_identification");
        {
            const TransferEstimate est = tabulate(Model{fit_polynomial(ds, cfg.poly_degree)}, cfg.dac.bits);
            luts.poly = build_lut(est, fit_linear_target(est));
        }
        manifest["completed"].push_back("poly_identification");
        luts.oracle = oracle_lut(cfg.dac, mm);

        const ComparisonReport report = sweep(cfg, mm, luts);
        io::write_text_atomic(out / "sweep.json", with_provenance(to_json(report), cfg).dump(2) + "\n");
        for (const auto& [name, points] : report.scenarios)
            io::write_text_atomic(out / ("sweep_" + name + ".csv"), scenario_csv(points));
        write_config_echo(cfg);

        std::printf("%-11s", "center GHz");
        for (const auto& name : kScenarios) std::printf(" %11s", name.c_str());
        std::printf("   (worst IM dBc)\n");
        const auto& first = report.scenarios.front().second;
        for (std::size_t i = 0; i < first.size(); ++i) {
            std::printf("%5.1f@%5.1f", first[i].center_hz / 1e9, first[i].dbfs_per_tone);
            for (const auto& [name, points] : report.scenarios) {
                const auto w = points[i].report.worst_im_dbc();
                std::printf(" %11.2f", w ? *w : std::nan(""));
            }
            std::printf("\n");
        }
    } catch (const std::exception& e) {
        manifest["error"] = e.what();
        io::write_text_atomic(out / "sweep_partial.json", with_provenance(manifest, cfg).dump(2) + "\n");
        throw;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Current-steering DAC behavioral simulator and NN-based pre-distortion toolkit"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", opt.seed, "Mismatch seed override");
    app.add_option("--model", opt.model, "Regressor: mlp, poly (build-lut also accepts oracle)")
        ->check(CLI::IsMember({"mlp", "poly", "oracle"}));
    app.add_option("--lut", opt.lut_path, "LUT JSON applied before the DAC")->check(CLI::ExistingFile);
    app.add_flag("--dem", opt.dem, "Enable dynamic element matching");
    app.add_flag("--ideal", opt.ideal, "Use a mismatch-free DAC");
    app.add_option("--avg", opt.avg, "Average K identification captures")->check(CLI::PositiveNumber);
    app.add_option("--out", opt.out_dir, "Output directory (default $DACLIN_OUT or ./out)");
    app.add_flag("--print-config", opt.print_config, "Print the effective configuration and exit");

    auto* simulate = app.add_subcommand("simulate", "Draw mismatch and tabulate the transfer characteristic");
    auto* identify = app.add_subcommand("identify", "Capture the identification sine and fit a model");
    auto* build_lut_cmd = app.add_subcommand("build-lut", "Invert a fitted model into a pre-distortion LUT");
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Two-tone spectrum and IM report");
    auto* sweep_cmd = app.add_subcommand("sweep", "Compare baseline, DEM, polynomial, NN and oracle DPD");
    for (auto* sub : {simulate, identify, build_lut_cmd, evaluate_cmd, sweep_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const RunConfig cfg = load_config(opt);
        if (opt.print_config) {
            std::cout << to_json(cfg).dump(2) << "\n";
            return 0;
        }
        if (opt.model == "oracle" && !build_lut_cmd->parsed())
            throw ConfigError("--model oracle is only valid for build-lut");
        if (simulate->parsed()) return cmd_simulate(cfg, opt);
        if (identify->parsed()) return cmd_identify(cfg, opt);
        if (build_lut_cmd->parsed()) return cmd_build_lut(cfg, opt);
        if (evaluate_cmd->parsed()) return cmd_evaluate(cfg, opt);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, opt);
    } catch (const TrainingError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const FitError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const AmbiguityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "error: invalid JSON: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
    return 0;
}
