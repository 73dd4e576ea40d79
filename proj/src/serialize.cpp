#include "daclin/serialize.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "daclin/error.hpp"

namespace daclin::io {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << content;
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json to_json(const MismatchProfile& mm) {
    json j;
    j["sigma_u"] = mm.sigma_u;
    j["seed"] = mm.seed;
    j["binary_deltas"] = mm.binary_deltas;
    j["unit_deltas"] = mm.unit_deltas;
    return j;
}

MismatchProfile mismatch_from_json(const json& j) {
    try {
        MismatchProfile mm;
        mm.sigma_u = j.at("sigma_u").get<double>();
        mm.seed = j.at("seed").get<std::uint64_t>();
        mm.binary_deltas = j.at("binary_deltas").get<std::vector<double>>();
        mm.unit_deltas = j.at("unit_deltas").get<std::vector<double>>();
        return mm;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed mismatch profile: ") + e.what());
    }
}

std::string transfer_csv(const TransferCharacteristic& tc) {
    std::string out = "code,current\n";
    for (std::size_t x = 0; x < tc.outputs.size(); ++x)
        out += std::to_string(x) + "," + format_real(tc.outputs[x]) + "\n";
    return out;
}

std::string dataset_csv(const Dataset& ds) {
    std::string out = "n,x,y\n";
    for (std::size_t i = 0; i < ds.size(); ++i)
        out += std::to_string(ds.index[i]) + "," + std::to_string(ds.x[i]) + "," + format_real(ds.y[i]) + "\n";
    return out;
}

Dataset dataset_from_csv(const std::string& csv, int bits, const std::string& metadata_json) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != "n,x,y") throw ConfigError("dataset CSV must start with 'n,x,y'");
    Dataset ds;
    ds.bits = bits;
    ds.metadata_json = metadata_json;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::uint64_t n = 0;
        unsigned x = 0;
        double y = 0.0;
        if (std::sscanf(line.c_str(), "%" SCNu64 ",%u,%lf", &n, &x, &y) != 3)
            throw ConfigError("malformed dataset row: " + line);
        ds.index.push_back(n);
        ds.x.push_back(x);
        ds.y.push_back(y);
    }
    ds.validate();
    return ds;
}

json to_json(const Normalization& n) {
    return json{{"x_center", n.x_center}, {"x_scale", n.x_scale}, {"y_center", n.y_center}, {"y_scale", n.y_scale}};
}

Normalization normalization_from_json(const json& j) {
    return {j.at("x_center").get<double>(), j.at("x_scale").get<double>(), j.at("y_center").get<double>(),
            j.at("y_scale").get<double>()};
}

json to_json(const Model& model) {
    json j;
    if (const auto* m = std::get_if<MlpModel>(&model)) {
        j["type"] = "mlp";
        j["H"] = m->params.hidden();
        j["w0"] = m->params.w0;
        j["b0"] = m->params.b0;
        j["w1"] = m->params.w1;
        j["b1"] = m->params.b1;
        j["norm"] = to_json(m->norm);
    } else {
        const auto& p = std::get<PolyModel>(model);
        j["type"] = "poly";
        j["degree"] = p.degree;
        j["coeffs"] = p.coeffs;
        j["norm"] = to_json(p.norm);
    }
    return j;
}

Model model_from_json(const json& j) {
    try {
        const auto type = j.at("type").get<std::string>();
        if (type == "mlp") {
            MlpModel m;
            m.params.w0 = j.at("w0").get<std::vector<double>>();
            m.params.b0 = j.at("b0").get<std::vector<double>>();
            m.params.w1 = j.at("w1").get<std::vector<double>>();
            m.params.b1 = j.at("b1").get<double>();
            m.norm = normalization_from_json(j.at("norm"));
            if (j.at("H").get<int>() != m.params.hidden()) throw ConfigError("model H does not match w0 length");
            m.params.validate();
            return m;
        }
        if (type == "poly") {
            PolyModel p;
            p.degree = j.at("degree").get<int>();
            p.coeffs = j.at("coeffs").get<std::vector<double>>();
            p.norm = normalization_from_json(j.at("norm"));
            if (p.coeffs.size() != static_cast<std::size_t>(p.degree) + 1)
                throw ConfigError("polynomial coefficient count does not match degree");
            return p;
        }
        throw ConfigError("unknown model type '" + type + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed model file: ") + e.what());
    }
}

std::string loss_csv(const std::vector<double>& history) {
    std::string out = "epoch,loss\n";
    for (std::size_t e = 0; e < history.size(); ++e) out += std::to_string(e) + "," + format_real(history[e]) + "\n";
    return out;
}

json to_json(const Lut& lut) {
    json j;
    j["bits"] = lut.bits;
    j["entries"] = lut.entries;
    return j;
}

Lut lut_from_json(const json& j) {
    try {
        Lut lut;
        lut.bits = j.at("bits").get<int>();
        lut.entries = j.at("entries").get<std::vector<std::uint32_t>>();
        lut.validate();
        return lut;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed LUT file: ") + e.what());
    }
}

std::string lut_csv(const Lut& lut) {
    std::string out = "code,predistorted_code\n";
    for (std::size_t x = 0; x < lut.entries.size(); ++x)
        out += std::to_string(x) + "," + std::to_string(lut.entries[x]) + "\n";
    return out;
}

std::string stimulus_csv(const std::vector<std::uint32_t>& codes) {
    std::string out = "n,code\n";
    for (std::size_t n = 0; n < codes.size(); ++n) out += std::to_string(n) + "," + std::to_string(codes[n]) + "\n";
    return out;
}

json to_json(const StimulusPlan& plan) {
    json j;
    j["n_samples"] = plan.n_samples;
    j["sample_rate"] = plan.sample_rate;
    json tones = json::array();
    for (const auto& t : plan.tones)
        tones.push_back({{"requested_hz", t.spec.freq_hz},
                         {"bin", t.bin},
                         {"snapped_hz", t.snapped_hz},
                         {"amplitude_dbfs", t.spec.amplitude_dbfs},
                         {"phase_rad", t.spec.phase_rad}});
    j["tones"] = tones;
    if (plan.dc_offset_code) j["dc_offset_code"] = *plan.dc_offset_code;
    return j;
}

std::string spectrum_csv(const Spectrum& s) {
    std::string out = "freq_hz,power_dbfs\n";
    for (std::size_t k = 0; k < s.power_dbfs.size(); ++k)
        out += format_real(s.bin_hz(k)) + "," + format_real(s.power_dbfs[k]) + "\n";
    return out;
}

json to_json(const ImReport& r) {
    json j;
    j["reference"] = "dBc relative to mean tone power; IMn = worst in-band product of order n";
    j["tone_power_dbfs"] = r.tone_power_dbfs;
    j["mean_tone_dbfs"] = r.mean_tone_dbfs;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    j["im3_dbc"] = opt(r.im3_dbc);
    j["im5_dbc"] = opt(r.im5_dbc);
    j["im7_dbc"] = opt(r.im7_dbc);
    j["sfdr_dbc"] = r.sfdr_dbc;
    j["sfdr_spur_bin"] = r.sfdr_spur_bin;
    j["noise_floor_dbfs_per_bin"] = r.noise_floor_dbfs_per_bin;
    json products = json::object();
    for (const auto& [order, levels] : r.products) {
        json arr = json::array();
        for (const auto& p : levels) arr.push_back({{"bin", p.bin}, {"freq_hz", p.freq_hz}, {"power_dbfs", p.power_dbfs}});
        products["im" + std::to_string(order)] = arr;
    }
    j["products"] = products;
    return j;
}

std::string digest(const json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

} // namespace daclin::io
