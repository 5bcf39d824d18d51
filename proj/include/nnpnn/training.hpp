#ifndef NNPNN_TRAINING_HPP
#define NNPNN_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "nnpnn/autodiff.hpp"
#include "nnpnn/host.hpp"
#include "nnpnn/metrics.hpp"
#include "nnpnn/networks.hpp"
#include "nnpnn/rng.hpp"

namespace nnpnn {

enum class Experiment { Inverse, Compress };

const char* experiment_name(Experiment e);

// Host-side knobs exposed in run configs (dims are derived from the target
// template per experiment). Field defaults are the inverse-experiment
// defaults; default_run_config() adjusts the compress ones.
struct HostPlan {
    int phases = 2;             // l
    int queries_per_phase = 4;  // r
    int w1 = 32;
    int w2 = 32;
    int seed_dim = 16;
    bool append_phase_input = true;
    double query_head_gain = 1.0;
};

struct MetaPlan {
    int meta_dim = 16;
    int hidden_layers = 3;
    int hidden_width = 128;
    MetaConnectivity connectivity = MetaConnectivity::Dense;
    double init_gain = 4.0;
};

struct RunConfig {
    Experiment experiment = Experiment::Inverse;
    uint64_t seed = 42;
    long long iterations = 100000;
    double learning_rate = 2e-5;
    double rms_decay = 0.9;
    double rms_epsilon = 1e-8;
    int batch_size = 1;
    long long eval_every = 1000;
    long long eval_trials = 1000;
    long long ckpt_every = 25000;  // 0 disables periodic checkpoints
    TargetTemplate target;
    HostPlan host;
    MetaPlan meta;

    void validate() const;
};

// Baseline settings per experiment. The compress defaults widen the
// encoder's probing (query_head_gain) and its blocks, which the inverse
// host does not benefit from.
RunConfig default_run_config(Experiment e);

// Concrete model configs for one run.
NnpnnConfig inverse_host_config(const RunConfig& cfg);
NnpnnConfig compress_host_config(const RunConfig& cfg);
MetaNetConfig compress_meta_config(const RunConfig& cfg);

// RMSProp accumulator, flat-aligned with the parameter store.
struct RmsState {
    double decay = 0.9;
    double epsilon = 1e-8;
    double learning_rate = 2e-5;
    std::vector<double> v;
};

RmsState make_rms_state(const ParamStore& params, double learning_rate,
                        double decay = 0.9, double epsilon = 1e-8);

// v <- decay*v + (1-decay)*g^2; theta <- theta - lr*g/(sqrt(v)+eps),
// elementwise in flat-layout order. Non-finite gradients raise ValueError.
void rmsprop_step(RmsState& state, ParamStore& params, const GradientMap& grads);

// Everything a run owns. Sessions are what checkpoints serialize.
struct InverseSession {
    RunConfig cfg;
    ParamStore params;
    Nnpnn host;
    RmsState rms;
    Rng rng{0};
    long long iteration = 0;
    MetricsHistory history;
};

struct CompressSession {
    RunConfig cfg;
    ParamStore params;  // encoder first, then the meta network
    Nnpnn encoder;      // F1
    MetaNetwork decoder;  // F2
    RmsState rms;
    Rng rng{0};
    long long iteration = 0;
    MetricsHistory history;
};

InverseSession make_inverse_session(const RunConfig& cfg);
CompressSession make_compress_session(const RunConfig& cfg);

// Called after an evaluation row is appended and at periodic checkpoint
// iterations, so a driver can persist state mid-run.
struct TrainHooks {
    std::function<void(long long iteration)> on_eval;
    std::function<void(long long iteration)> on_checkpoint;
};

// Runs from session.iteration to cfg.iterations. Per iteration: fresh
// target network, fresh Gaussian input, forward through the host and the
// target, loss, backward, RMSProp step on the host's parameters only.
// Aborts with TrainAbortError on any non-finite loss or gradient, leaving
// the parameters at the last good state.
void train_inverse(InverseSession& s, const TrainHooks& hooks = {});

// Per iteration: fresh target, encoder emits the meta vector from its seed
// input, decoder predicts the target's output on a fresh Gaussian input,
// MSE loss, joint step on encoder and decoder parameters.
void train_compression(CompressSession& s, const TrainHooks& hooks = {});

// Fresh-trial evaluation. Each trial draws a new target network and input;
// the deviation is the Manhattan ratio between the target applied to the
// host's output and the host's input. Zero-norm targets are resampled.
EvalStats evaluate_inverse(const Nnpnn& host, const ParamStore& params,
                           const TargetTemplate& tmpl, Rng& rng, long long trials);

// Per-example squared error of the decoder against a fresh target network.
EvalStats evaluate_compression(const Nnpnn& encoder, const MetaNetwork& decoder,
                               const ParamStore& params, const TargetTemplate& tmpl,
                               Rng& rng, long long trials);

// Evaluation stream for a given iteration; independent of the training
// stream so logging frequency never alters the trajectory.
Rng eval_rng(const RunConfig& cfg, long long iteration);

}  // namespace nnpnn

#endif
