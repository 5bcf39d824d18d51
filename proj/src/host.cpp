#include "nnpnn/host.hpp"

#include <cmath>
#include <string>

namespace nnpnn {

void NnpnnConfig::validate() const {
    if (l < 1) throw ConfigError("NnpnnConfig: l must be >= 1");
    if (r < 1) throw ConfigError("NnpnnConfig: r must be >= 1");
    if (input_dim < 0) throw ConfigError("NnpnnConfig: input_dim must be >= 0");
    if (input_dim == 0 && seed_dim < 1) {
        throw ConfigError("NnpnnConfig: seed_dim must be >= 1 when there is no numeric input");
    }
    if (output_dim < 1 || query_dim < 1 || read_dim < 1) {
        throw ConfigError("NnpnnConfig: output/query/read dims must be >= 1");
    }
    if (w1 < 1 || w2 < 1) throw ConfigError("NnpnnConfig: widths must be >= 1");
    if (!(query_head_gain > 0.0)) {
        throw ConfigError("NnpnnConfig: query_head_gain must be > 0");
    }
}

namespace {

ParamId add_uniform_param(Rng& rng, ParamStore& ps, const std::string& name, int rows,
                          int cols, int fan_in, double gain) {
    ParamId id = ps.add(name, rows, cols);
    double s = gain / std::sqrt(static_cast<double>(fan_in));
    for (double& v : ps.values(id)) v = rng.uniform(-s, s);
    return id;
}

DenseLayerRef init_layer(Rng& rng, ParamStore& ps, const std::string& name, int in_dim,
                         int out_dim, double gain = 1.0) {
    DenseLayerRef layer;
    layer.in_dim = in_dim;
    layer.out_dim = out_dim;
    layer.w = add_uniform_param(rng, ps, name + ".w", out_dim, in_dim, in_dim, gain);
    layer.b = add_uniform_param(rng, ps, name + ".b", out_dim, 1, in_dim, gain);
    return layer;
}

// `head_gain` scales only the closing layer's initialization.
SubBlock init_sub_block(Rng& rng, ParamStore& ps, const std::string& name, int in_dim,
                        int w1, int w2, int out_dim, bool linear_output,
                        double head_gain = 1.0) {
    SubBlock sb;
    sb.d1 = init_layer(rng, ps, name + ".d1", in_dim, w1);
    sb.d2 = init_layer(rng, ps, name + ".d2", w1, w2);
    sb.d3 = init_layer(rng, ps, name + ".d3", in_dim + w1 + w2, out_dim, head_gain);
    sb.linear_output = linear_output;
    return sb;
}

// sb1 keeps width w1 as the trunk between the sub-blocks; sb2 narrows (or
// widens) to whatever the consumer needs.
ProcessingBlock init_block(Rng& rng, ParamStore& ps, const std::string& name, int in_dim,
                           int w1, int w2, int out_dim, bool linear_output,
                           double head_gain = 1.0) {
    ProcessingBlock pb;
    pb.sb1 = init_sub_block(rng, ps, name + ".sb1", in_dim, w1, w2, w1, false);
    pb.sb2 = init_sub_block(rng, ps, name + ".sb2", w1, w1, w2, out_dim, linear_output,
                            head_gain);
    return pb;
}

int pair_dim(const NnpnnConfig& cfg) { return cfg.r * (cfg.read_dim + cfg.query_dim); }

// Input dimension of phase k (0-based) and of the output block.
int phase_input_dim(const NnpnnConfig& cfg, int k) {
    if (k == 0) return cfg.phase1_input_dim();
    int d = pair_dim(cfg);
    if (cfg.append_phase_input) d += phase_input_dim(cfg, k - 1);
    return d;
}

}  // namespace

Nnpnn nnpnn_init(Rng& rng, const NnpnnConfig& cfg, ParamStore& params) {
    cfg.validate();
    Nnpnn f;
    f.cfg = cfg;

    for (int k = 0; k < cfg.l; ++k) {
        Phase phase;
        phase.block = init_block(rng, params, "host.phase" + std::to_string(k),
                                 phase_input_dim(cfg, k), cfg.w1, cfg.w2,
                                 cfg.r * cfg.query_dim, true, cfg.query_head_gain);
        f.phases.push_back(std::move(phase));
    }
    f.output_block = init_block(rng, params, "host.out", phase_input_dim(cfg, cfg.l),
                                cfg.w1, cfg.w2, cfg.output_dim, true);
    f.seed_vector = params.add("host.seed_vector", cfg.phase1_input_dim(), 1);
    return f;
}

VecNode sub_block_forward(Graph& g, const SubBlock& sb, VecNode x) {
    VecNode y1 = tanh_act(g, affine(g, sb.d1.w, sb.d1.b, x));
    VecNode y2 = tanh_act(g, affine(g, sb.d2.w, sb.d2.b, y1));
    VecNode y3 = affine(g, sb.d3.w, sb.d3.b, concat(g, {x, y1, y2}));
    return sb.linear_output ? y3 : tanh_act(g, y3);
}

VecNode block_forward(Graph& g, const ProcessingBlock& pb, VecNode x) {
    return sub_block_forward(g, pb.sb2, sub_block_forward(g, pb.sb1, x));
}

NnpnnResult nnpnn_forward_reads(Graph& g, const Nnpnn& f,
                                std::optional<std::span<const double>> x,
                                const ReadFn& read, int read_dim) {
    const NnpnnConfig& cfg = f.cfg;
    VecNode h{};
    if (x.has_value()) {
        if (cfg.input_dim == 0) {
            throw ShapeError("nnpnn_forward: model takes no numeric input");
        }
        if (static_cast<int>(x->size()) != cfg.input_dim) {
            throw ShapeError("nnpnn_forward: input dim " + std::to_string(x->size()) +
                             " != " + std::to_string(cfg.input_dim));
        }
        h = g.leaf(*x);
    } else {
        h = g.param_leaf(f.seed_vector);
    }

    NnpnnResult result;
    result.trace.reserve(static_cast<size_t>(cfg.l) * cfg.r);
    result.phase_inputs.reserve(static_cast<size_t>(cfg.l) + 1);
    result.phase_inputs.push_back(g.value(h));

    for (int k = 0; k < cfg.l; ++k) {
        VecNode queries = block_forward(g, f.phases[k].block, h);
        std::vector<VecNode> parts;
        parts.reserve(2 * static_cast<size_t>(cfg.r) + 1);
        for (int n = 0; n < cfg.r; ++n) {
            VecNode query = slice(g, queries, n * cfg.query_dim, cfg.query_dim);
            VecNode rd = read(g, query);
            if (rd.dim != read_dim) {
                throw ShapeError("nnpnn_forward: read dim " + std::to_string(rd.dim) +
                                 " != " + std::to_string(read_dim));
            }
            parts.push_back(rd);
            parts.push_back(query);
            result.trace.push_back({g.value(query), g.value(rd)});
        }
        if (cfg.append_phase_input) parts.push_back(h);
        h = concat(g, parts);
        result.phase_inputs.push_back(g.value(h));
    }

    result.output = block_forward(g, f.output_block, h);
    return result;
}

NnpnnResult nnpnn_forward(Graph& g, const Nnpnn& f,
                          std::optional<std::span<const double>> x,
                          const DenseNetwork& target) {
    if (target.spec.input_dim != f.cfg.query_dim) {
        throw ShapeError("nnpnn_forward: target input dim " +
                         std::to_string(target.spec.input_dim) + " != query dim " +
                         std::to_string(f.cfg.query_dim));
    }
    auto read = [&target](Graph& gg, VecNode q) { return dense_forward(gg, target, q); };
    return nnpnn_forward_reads(g, f, x, read, target.spec.output_dim);
}

size_t nnpnn_param_count(const NnpnnConfig& cfg) {
    cfg.validate();
    auto layer = [](int in, int out) {
        return static_cast<size_t>(out) * in + static_cast<size_t>(out);
    };
    auto sub_block = [&](int in, int w1, int w2, int out) {
        return layer(in, w1) + layer(w1, w2) + layer(in + w1 + w2, out);
    };
    auto block = [&](int in, int out) {
        return sub_block(in, cfg.w1, cfg.w2, cfg.w1) +
               sub_block(cfg.w1, cfg.w1, cfg.w2, out);
    };
    size_t n = 0;
    for (int k = 0; k < cfg.l; ++k) {
        n += block(phase_input_dim(cfg, k), cfg.r * cfg.query_dim);
    }
    n += block(phase_input_dim(cfg, cfg.l), cfg.output_dim);
    n += static_cast<size_t>(cfg.phase1_input_dim());  // seed vector
    return n;
}

}  // namespace nnpnn
