#ifndef NNPNN_CONFIG_HPP
#define NNPNN_CONFIG_HPP

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "nnpnn/training.hpp"

namespace nnpnn {

using ordered_json = nlohmann::ordered_json;

// Strict parse: unknown keys anywhere are configuration errors, so a typoed
// hyperparameter never silently falls back to a default. `expect`, when
// given, must match the file's "experiment" field if present.
RunConfig parse_run_config(const ordered_json& j,
                           std::optional<Experiment> expect = std::nullopt);

RunConfig load_config_file(const std::filesystem::path& path,
                           std::optional<Experiment> expect = std::nullopt);

ordered_json run_config_to_json(const RunConfig& cfg);

// Snapshot of every setting actually in effect, sufficient to reproduce
// the run.
void write_config_resolved(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace nnpnn

#endif
