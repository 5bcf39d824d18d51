#include "nnpnn/run.hpp"

#include "nnpnn/config.hpp"
#include "nnpnn/metrics.hpp"

namespace nnpnn {

namespace {

namespace fs = std::filesystem;

template <typename Session, typename TrainFn, typename EvalFn>
EvalStats drive(Session& s, const fs::path& out_dir, const TrainFn& train,
                const EvalFn& evaluate) {
    fs::create_directories(out_dir);
    write_config_resolved(s.cfg, out_dir / "config-resolved.json");
    write_csv(s.history.rows, out_dir / "metrics.csv");

    TrainHooks hooks;
    hooks.on_eval = [&](long long) {
        write_csv(s.history.rows, out_dir / "metrics.csv");
    };
    hooks.on_checkpoint = [&](long long iter) {
        save_checkpoint(s, out_dir / ("ckpt-" + std::to_string(iter) + ".json"));
    };

    try {
        train(s, hooks);
    } catch (const TrainAbortError&) {
        save_checkpoint(s, out_dir / "ckpt-abort.json");
        throw;
    }

    save_checkpoint(s, out_dir / "ckpt-final.json");
    Rng er = eval_rng(s.cfg, s.iteration);
    return evaluate(er);
}

}  // namespace

EvalStats run_inverse(InverseSession& s, const fs::path& out_dir) {
    return drive(
        s, out_dir, [](InverseSession& ss, const TrainHooks& h) { train_inverse(ss, h); },
        [&](Rng& er) {
            return evaluate_inverse(s.host, s.params, s.cfg.target, er,
                                    s.cfg.eval_trials);
        });
}

EvalStats run_compress(CompressSession& s, const fs::path& out_dir) {
    return drive(
        s, out_dir,
        [](CompressSession& ss, const TrainHooks& h) { train_compression(ss, h); },
        [&](Rng& er) {
            return evaluate_compression(s.encoder, s.decoder, s.params, s.cfg.target, er,
                                        s.cfg.eval_trials);
        });
}

}  // namespace nnpnn
