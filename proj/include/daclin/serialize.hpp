#pragma once

// File formats: JSON documents and CSV tables exchanged by the CLI.
// CSV reals are written with 17 significant digits so they round-trip.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "daclin/capture_chain.hpp"
#include "daclin/dac_core.hpp"
#include "daclin/dpd_lut.hpp"
#include "daclin/spectral.hpp"
#include "daclin/stimulus.hpp"
#include "daclin/sysid.hpp"

namespace daclin::io {

using json = nlohmann::ordered_json;

std::string format_real(double v);

// Writes through a temporary file and renames into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

json to_json(const MismatchProfile& mm);
MismatchProfile mismatch_from_json(const json& j);

std::string transfer_csv(const TransferCharacteristic& tc);

std::string dataset_csv(const Dataset& ds);
Dataset dataset_from_csv(const std::string& csv, int bits, const std::string& metadata_json = "{}");

json to_json(const Normalization& n);
Normalization normalization_from_json(const json& j);
json to_json(const Model& model);
Model model_from_json(const json& j);

std::string loss_csv(const std::vector<double>& history);

json to_json(const Lut& lut);
Lut lut_from_json(const json& j);
std::string lut_csv(const Lut& lut);

std::string stimulus_csv(const std::vector<std::uint32_t>& codes);
json to_json(const StimulusPlan& plan);

std::string spectrum_csv(const Spectrum& s);
json to_json(const ImReport& r);

// FNV-1a over the compact dump, hex encoded.
std::string digest(const json& j);

} // namespace daclin::io
