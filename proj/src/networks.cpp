#include "nnpnn/networks.hpp"

#include <cmath>
#include <string>

namespace nnpnn {

void NetSpec::validate() const {
    if (input_dim < 1 || output_dim < 1 || hidden_width < 1) {
        throw ConfigError("NetSpec: all dimensions must be >= 1");
    }
    if (hidden_layers < 1 || hidden_layers > 5) {
        throw ConfigError("NetSpec: hidden_layers must be in [1, 5], got " +
                          std::to_string(hidden_layers));
    }
}

void TargetTemplate::validate() const {
    if (input_dim < 1 || output_dim < 1 || hidden_width < 1) {
        throw ConfigError("TargetTemplate: all dimensions must be >= 1");
    }
    if (layers_min < 1 || layers_max > 5 || layers_min > layers_max) {
        throw ConfigError("TargetTemplate: layer range must satisfy 1 <= min <= max <= 5");
    }
}

std::vector<double> DenseNetwork::eval(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != spec.input_dim) {
        throw ShapeError("DenseNetwork::eval: input dim " + std::to_string(x.size()) +
                         " != " + std::to_string(spec.input_dim));
    }
    std::vector<double> h(x.begin(), x.end());
    for (size_t li = 0; li < layers.size(); ++li) {
        const DenseLayer& layer = layers[li];
        std::vector<double> y(layer.w.rows);
        for (int r = 0; r < layer.w.rows; ++r) {
            double acc = 0.0;
            const double* row = layer.w.a.data() + static_cast<size_t>(r) * layer.w.cols;
            for (int c = 0; c < layer.w.cols; ++c) acc += row[c] * h[c];
            y[r] = acc + layer.b[r];
        }
        if (li + 1 < layers.size()) {
            for (double& v : y) v = std::tanh(v);
        }
        h = std::move(y);
    }
    return h;
}

DenseNetwork generate_nn(Rng& rng, const TargetTemplate& tmpl) {
    tmpl.validate();
    uint64_t net_seed = rng.next_u64();
    Rng sub(net_seed);

    DenseNetwork net;
    net.seed = net_seed;
    net.spec.input_dim = tmpl.input_dim;
    net.spec.output_dim = tmpl.output_dim;
    net.spec.hidden_width = tmpl.hidden_width;
    net.spec.hidden_layers = sub.uniform_int(tmpl.layers_min, tmpl.layers_max);

    int in = tmpl.input_dim;
    for (int li = 0; li <= net.spec.hidden_layers; ++li) {
        int out = (li == net.spec.hidden_layers) ? tmpl.output_dim : tmpl.hidden_width;
        DenseLayer layer;
        layer.w = Matrix(out, in);
        layer.b.resize(out);
        for (double& v : layer.w.a) v = sub.uniform(-1.0, 1.0);
        for (double& v : layer.b) v = sub.uniform(-1.0, 1.0);
        net.layers.push_back(std::move(layer));
        in = out;
    }
    return net;
}

VecNode dense_forward(Graph& g, const DenseNetwork& net, VecNode x) {
    if (x.dim != net.spec.input_dim) {
        throw ShapeError("dense_forward: input dim " + std::to_string(x.dim) + " != " +
                         std::to_string(net.spec.input_dim));
    }
    VecNode h = x;
    for (size_t li = 0; li < net.layers.size(); ++li) {
        h = affine(g, net.layers[li].w, net.layers[li].b, h);
        if (li + 1 < net.layers.size()) h = tanh_act(g, h);
    }
    return h;
}

size_t param_count(const DenseNetwork& net) {
    size_t n = 0;
    for (const DenseLayer& layer : net.layers) n += layer.w.size() + layer.b.size();
    return n;
}

size_t min_param_count(const TargetTemplate& tmpl) {
    tmpl.validate();
    // Parameter count grows with layer count, so the minimum sits at layers_min.
    size_t n = 0;
    int in = tmpl.input_dim;
    for (int li = 0; li <= tmpl.layers_min; ++li) {
        int out = (li == tmpl.layers_min) ? tmpl.output_dim : tmpl.hidden_width;
        n += static_cast<size_t>(out) * in + out;
        in = out;
    }
    return n;
}

std::vector<double> random_input(Rng& rng, int dim) {
    if (dim < 0) throw ShapeError("random_input: negative dim");
    std::vector<double> x(dim);
    for (double& v : x) v = rng.normal(0.0, 10.0);
    return x;
}

void MetaNetConfig::validate() const {
    if (meta_dim < 0) throw ConfigError("MetaNetConfig: meta_dim must be >= 0");
    if (input_dim < 1 || output_dim < 1 || hidden_width < 1) {
        throw ConfigError("MetaNetConfig: dimensions must be >= 1");
    }
    if (hidden_layers < 1) throw ConfigError("MetaNetConfig: hidden_layers must be >= 1");
    if (!(init_gain > 0.0)) throw ConfigError("MetaNetConfig: init_gain must be > 0");
}

namespace {

ParamId add_uniform_param(Rng& rng, ParamStore& ps, const std::string& name, int rows,
                          int cols, int fan_in, double gain) {
    ParamId id = ps.add(name, rows, cols);
    double s = gain / std::sqrt(static_cast<double>(fan_in));
    for (double& v : ps.values(id)) v = rng.uniform(-s, s);
    return id;
}

}  // namespace

MetaNetwork meta_init(Rng& rng, const MetaNetConfig& cfg, ParamStore& params) {
    cfg.validate();
    MetaNetwork mn;
    mn.cfg = cfg;

    for (int li = 0; li <= cfg.hidden_layers; ++li) {
        int in_dim = cfg.meta_dim + cfg.input_dim;
        if (cfg.connectivity == MetaConnectivity::Dense) {
            in_dim += li * cfg.hidden_width;
        } else if (li > 0) {
            in_dim = cfg.meta_dim + cfg.hidden_width;
        }
        int out_dim = (li == cfg.hidden_layers) ? cfg.output_dim : cfg.hidden_width;
        std::string base = "meta.L" + std::to_string(li);
        DenseLayerRef layer;
        layer.in_dim = in_dim;
        layer.out_dim = out_dim;
        layer.w = add_uniform_param(rng, params, base + ".w", out_dim, in_dim, in_dim,
                                    cfg.init_gain);
        layer.b = add_uniform_param(rng, params, base + ".b", out_dim, 1, in_dim,
                                    cfg.init_gain);
        mn.layers.push_back(layer);
    }
    return mn;
}

VecNode meta_forward(Graph& g, const MetaNetwork& mn, VecNode x, VecNode x_meta) {
    const MetaNetConfig& cfg = mn.cfg;
    if (x.dim != cfg.input_dim) {
        throw ShapeError("meta_forward: x dim " + std::to_string(x.dim) + " != " +
                         std::to_string(cfg.input_dim));
    }
    if (x_meta.dim != cfg.meta_dim) {
        throw ShapeError("meta_forward: x_meta dim " + std::to_string(x_meta.dim) +
                         " != " + std::to_string(cfg.meta_dim));
    }

    std::vector<VecNode> history;  // x then each hidden output, for dense wiring
    history.push_back(x);
    VecNode out{};
    for (size_t li = 0; li < mn.layers.size(); ++li) {
        std::vector<VecNode> parts;
        parts.push_back(x_meta);
        if (cfg.connectivity == MetaConnectivity::Dense) {
            parts.insert(parts.end(), history.begin(), history.end());
        } else {
            parts.push_back(history.back());
        }
        VecNode in = concat(g, parts);
        out = affine(g, mn.layers[li].w, mn.layers[li].b, in);
        if (li + 1 < mn.layers.size()) {
            out = tanh_act(g, out);
            history.push_back(out);
        }
    }
    return out;
}

}  // namespace nnpnn
