#ifndef NNPNN_RUN_HPP
#define NNPNN_RUN_HPP

#include <filesystem>

#include "nnpnn/checkpoint.hpp"
#include "nnpnn/training.hpp"

namespace nnpnn {

// Drives one training run against an output directory:
//   metrics.csv            rewritten after every evaluation
//   config-resolved.json   all settings actually in effect
//   ckpt-<iter>.json       periodic checkpoints (cfg.ckpt_every)
//   ckpt-final.json        state at the final iteration
// On a non-finite abort, ckpt-abort.json holds the last good state and the
// TrainAbortError propagates. Returns the final evaluation (fresh stream
// keyed by the final iteration).
EvalStats run_inverse(InverseSession& s, const std::filesystem::path& out_dir);
EvalStats run_compress(CompressSession& s, const std::filesystem::path& out_dir);

}  // namespace nnpnn

#endif
