#ifndef NNPNN_CHECKPOINT_HPP
#define NNPNN_CHECKPOINT_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nnpnn/training.hpp"

namespace nnpnn {

using ordered_json = nlohmann::ordered_json;

// Scalars in checkpoints are hexadecimal floating-point strings: exact
// round-trips are what the resume-equals-never-stopped guarantee rests on.
std::string hex_double(double v);
double parse_hex_double(const std::string& s);

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const InverseSession& s, const std::filesystem::path& path);
void save_checkpoint(const CompressSession& s, const std::filesystem::path& path);

// Reads only the experiment tag so a caller can pick the right loader.
Experiment peek_experiment(const std::filesystem::path& path);

InverseSession load_inverse_checkpoint(const std::filesystem::path& path);
CompressSession load_compress_checkpoint(const std::filesystem::path& path);

// Standalone serialization of a target network: shape, per-layer row-major
// weight and bias arrays, the initialization descriptor and the substream
// seed that produced it.
ordered_json dense_network_to_json(const DenseNetwork& net);
DenseNetwork dense_network_from_json(const ordered_json& j);

}  // namespace nnpnn

#endif
