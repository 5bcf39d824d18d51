#include "nnpnn/training.hpp"

#include <cmath>
#include <string>

namespace nnpnn {

const char* experiment_name(Experiment e) {
    return e == Experiment::Inverse ? "inverse" : "compress";
}

void RunConfig::validate() const {
    target.validate();
    if (iterations < 0) throw ConfigError("RunConfig: iterations must be >= 0");
    if (learning_rate <= 0.0) throw ConfigError("RunConfig: learning_rate must be > 0");
    if (rms_decay <= 0.0 || rms_decay >= 1.0) {
        throw ConfigError("RunConfig: rms_decay must be in (0, 1)");
    }
    if (rms_epsilon <= 0.0) throw ConfigError("RunConfig: rms_epsilon must be > 0");
    if (batch_size < 1) throw ConfigError("RunConfig: batch_size must be >= 1");
    if (eval_every < 1) throw ConfigError("RunConfig: eval_every must be >= 1");
    if (eval_trials < 1) throw ConfigError("RunConfig: eval_trials must be >= 1");
    if (ckpt_every < 0) throw ConfigError("RunConfig: ckpt_every must be >= 0");
    if (host.phases < 1 || host.queries_per_phase < 1 || host.w1 < 1 || host.w2 < 1 ||
        host.seed_dim < 1) {
        throw ConfigError("RunConfig: host plan fields must be >= 1");
    }
    if (!(host.query_head_gain > 0.0)) {
        throw ConfigError("RunConfig: query_head_gain must be > 0");
    }
    if (experiment == Experiment::Compress) {
        if (meta.meta_dim < 1) throw ConfigError("RunConfig: meta_dim must be >= 1");
        if (meta.hidden_layers < 1 || meta.hidden_width < 1) {
            throw ConfigError("RunConfig: meta plan fields must be >= 1");
        }
        if (!(meta.init_gain > 0.0)) {
            throw ConfigError("RunConfig: meta init_gain must be > 0");
        }
        size_t min_params = min_param_count(target);
        if (static_cast<size_t>(meta.meta_dim) >= min_params) {
            throw ConfigError(
                "RunConfig: meta_dim " + std::to_string(meta.meta_dim) +
                " must be smaller than the smallest target parameter count (" +
                std::to_string(min_params) + ") to constitute a compression");
        }
    }
}

RunConfig default_run_config(Experiment e) {
    RunConfig cfg;
    cfg.experiment = e;
    if (e == Experiment::Compress) {
        cfg.host.w1 = 48;
        cfg.host.w2 = 48;
        cfg.host.query_head_gain = 10.0;
    }
    return cfg;
}

NnpnnConfig inverse_host_config(const RunConfig& cfg) {
    NnpnnConfig h;
    h.l = cfg.host.phases;
    h.r = cfg.host.queries_per_phase;
    h.input_dim = cfg.target.output_dim;  // F consumes G(x)
    h.seed_dim = cfg.host.seed_dim;
    h.output_dim = cfg.target.input_dim;  // F emits a preimage candidate
    h.query_dim = cfg.target.input_dim;
    h.read_dim = cfg.target.output_dim;
    h.w1 = cfg.host.w1;
    h.w2 = cfg.host.w2;
    h.append_phase_input = cfg.host.append_phase_input;
    h.query_head_gain = cfg.host.query_head_gain;
    return h;
}

NnpnnConfig compress_host_config(const RunConfig& cfg) {
    NnpnnConfig h = inverse_host_config(cfg);
    h.input_dim = 0;  // the encoder takes only the target; seed vector feeds phase 1
    h.output_dim = cfg.meta.meta_dim;
    return h;
}

MetaNetConfig compress_meta_config(const RunConfig& cfg) {
    MetaNetConfig m;
    m.meta_dim = cfg.meta.meta_dim;
    m.input_dim = cfg.target.input_dim;
    m.output_dim = cfg.target.output_dim;
    m.hidden_layers = cfg.meta.hidden_layers;
    m.hidden_width = cfg.meta.hidden_width;
    m.connectivity = cfg.meta.connectivity;
    m.init_gain = cfg.meta.init_gain;
    return m;
}

RmsState make_rms_state(const ParamStore& params, double learning_rate, double decay,
                        double epsilon) {
    RmsState s;
    s.decay = decay;
    s.epsilon = epsilon;
    s.learning_rate = learning_rate;
    s.v.assign(params.size(), 0.0);
    return s;
}

void rmsprop_step(RmsState& state, ParamStore& params, const GradientMap& grads) {
    auto theta = params.flat();
    if (state.v.size() != theta.size() || grads.flat.size() != theta.size()) {
        throw ShapeError("rmsprop_step: state/gradient size mismatch");
    }
    for (size_t i = 0; i < theta.size(); ++i) {
        double g = grads.flat[i];
        if (!std::isfinite(g)) {
            throw ValueError("rmsprop_step: non-finite gradient at flat index " +
                             std::to_string(i));
        }
        state.v[i] = state.decay * state.v[i] + (1.0 - state.decay) * g * g;
        theta[i] -= state.learning_rate * g / (std::sqrt(state.v[i]) + state.epsilon);
    }
}

InverseSession make_inverse_session(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.experiment != Experiment::Inverse) {
        throw ConfigError("make_inverse_session: config is not an inverse run");
    }
    InverseSession s;
    s.cfg = cfg;
    s.rng = Rng(cfg.seed);
    s.host = nnpnn_init(s.rng, inverse_host_config(cfg), s.params);
    s.rms = make_rms_state(s.params, cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon);
    return s;
}

CompressSession make_compress_session(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.experiment != Experiment::Compress) {
        throw ConfigError("make_compress_session: config is not a compress run");
    }
    CompressSession s;
    s.cfg = cfg;
    s.rng = Rng(cfg.seed);
    s.encoder = nnpnn_init(s.rng, compress_host_config(cfg), s.params);
    s.decoder = meta_init(s.rng, compress_meta_config(cfg), s.params);
    s.rms = make_rms_state(s.params, cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon);
    return s;
}

Rng eval_rng(const RunConfig& cfg, long long iteration) {
    return substream(cfg.seed, 0x4556414Cull + static_cast<uint64_t>(iteration));
}

namespace {

// One training step; returns the (batch-averaged) loss value.
template <typename BuildLoss>
double train_step(ParamStore& params, RmsState& rms, int batch_size,
                  const BuildLoss& build_loss) {
    Graph g(&params);
    VecNode loss{};
    if (batch_size == 1) {
        loss = build_loss(g);
    } else {
        std::vector<VecNode> parts;
        parts.reserve(batch_size);
        for (int b = 0; b < batch_size; ++b) parts.push_back(build_loss(g));
        loss = mean_all(g, parts);
    }
    double loss_value = g.scalar_value(loss);
    GradientMap grads = backward(g, loss);
    rmsprop_step(rms, params, grads);
    return loss_value;
}

template <typename Session, typename BuildLoss, typename Evaluate>
void train_loop(Session& s, const TrainHooks& hooks, const BuildLoss& build_loss,
                const Evaluate& evaluate) {
    const RunConfig& cfg = s.cfg;
    while (s.iteration < cfg.iterations) {
        long long iter = s.iteration + 1;
        double loss_value = 0.0;
        try {
            loss_value = train_step(s.params, s.rms, cfg.batch_size,
                                    [&](Graph& g) { return build_loss(g); });
        } catch (const ValueError& e) {
            throw TrainAbortError(iter, std::string("training aborted at iteration ") +
                                            std::to_string(iter) + ": " + e.what());
        }
        s.iteration = iter;
        s.history.iter_losses.push_back(loss_value);

        if (iter % cfg.eval_every == 0) {
            Rng er = eval_rng(cfg, iter);
            EvalStats stats = evaluate(er);
            s.history.rows.push_back({iter, loss_value, stats.mean, stats.median,
                                      stats.frac_within_10, stats.frac_within_25});
            if (hooks.on_eval) hooks.on_eval(iter);
        }
        if (cfg.ckpt_every > 0 && iter % cfg.ckpt_every == 0 && hooks.on_checkpoint) {
            hooks.on_checkpoint(iter);
        }
    }
}

}  // namespace

void train_inverse(InverseSession& s, const TrainHooks& hooks) {
    const RunConfig& cfg = s.cfg;
    auto build_loss = [&](Graph& g) {
        DenseNetwork target = generate_nn(s.rng, cfg.target);
        std::vector<double> g_input = random_input(s.rng, cfg.target.input_dim);
        std::vector<double> f_input = target.eval(g_input);
        NnpnnResult fw = nnpnn_forward(g, s.host, f_input, target);
        VecNode pred = dense_forward(g, target, fw.output);
        return mae_loss(g, pred, f_input);
    };
    auto evaluate = [&](Rng& er) {
        return evaluate_inverse(s.host, s.params, cfg.target, er, cfg.eval_trials);
    };
    train_loop(s, hooks, build_loss, evaluate);
}

void train_compression(CompressSession& s, const TrainHooks& hooks) {
    const RunConfig& cfg = s.cfg;
    auto build_loss = [&](Graph& g) {
        DenseNetwork target = generate_nn(s.rng, cfg.target);
        VecNode x_meta = nnpnn_forward(g, s.encoder, std::nullopt, target).output;
        std::vector<double> x = random_input(s.rng, cfg.target.input_dim);
        VecNode pred = meta_forward(g, s.decoder, g.leaf(x), x_meta);
        return mse_loss(g, pred, target.eval(x));
    };
    auto evaluate = [&](Rng& er) {
        return evaluate_compression(s.encoder, s.decoder, s.params, cfg.target, er,
                                    cfg.eval_trials);
    };
    train_loop(s, hooks, build_loss, evaluate);
}

EvalStats evaluate_inverse(const Nnpnn& host, const ParamStore& params,
                           const TargetTemplate& tmpl, Rng& rng, long long trials) {
    if (trials < 1) throw ConfigError("evaluate_inverse: trials must be >= 1");
    std::vector<double> deviations;
    deviations.reserve(trials);
    while (static_cast<long long>(deviations.size()) < trials) {
        DenseNetwork target = generate_nn(rng, tmpl);
        std::vector<double> g_input = random_input(rng, tmpl.input_dim);
        std::vector<double> f_input = target.eval(g_input);

        Graph g(&params);
        NnpnnResult fw = nnpnn_forward(g, host, f_input, target);
        std::vector<double> mapped_back = target.eval(g.value(fw.output));
        std::optional<double> dev = manhattan_ratio(mapped_back, f_input);
        if (!dev.has_value()) continue;  // zero-norm target: resample
        deviations.push_back(*dev);
    }
    return summarize(deviations);
}

EvalStats evaluate_compression(const Nnpnn& encoder, const MetaNetwork& decoder,
                               const ParamStore& params, const TargetTemplate& tmpl,
                               Rng& rng, long long trials) {
    if (trials < 1) throw ConfigError("evaluate_compression: trials must be >= 1");
    std::vector<double> losses;
    losses.reserve(trials);
    for (long long t = 0; t < trials; ++t) {
        DenseNetwork target = generate_nn(rng, tmpl);
        std::vector<double> x = random_input(rng, tmpl.input_dim);

        Graph g(&params);
        VecNode x_meta = nnpnn_forward(g, encoder, std::nullopt, target).output;
        VecNode pred = meta_forward(g, decoder, g.leaf(x), x_meta);
        VecNode mse = mse_loss(g, pred, target.eval(x));
        losses.push_back(g.scalar_value(mse));
    }
    return summarize(losses);
}

}  // namespace nnpnn
