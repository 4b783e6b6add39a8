#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "gailpen/trainer.hpp"

namespace gailpen {

// UTC wall-clock time as "YYYY-MM-DDTHH:MM:SSZ".
std::string iso_utc_timestamp();

// Writes pretty-printed JSON with a trailing newline via a temporary file
// and rename, so readers never observe a partial manifest.
void write_json_file(const std::filesystem::path& destination,
                     const nlohmann::json& body);

std::string fingerprint_hex(std::uint64_t fingerprint);

nlohmann::json config_json(const TrainingConfig& config);
nlohmann::json provenance_json(const DataProvenance& provenance);

std::string optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name);
std::string prefix_mode_name(PrefixMode mode);
PrefixMode prefix_mode_from_name(const std::string& name);

}  // namespace gailpen
