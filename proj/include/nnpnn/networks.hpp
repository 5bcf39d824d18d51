#ifndef NNPNN_NETWORKS_HPP
#define NNPNN_NETWORKS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "nnpnn/autodiff.hpp"
#include "nnpnn/rng.hpp"

namespace nnpnn {

// Shape of one concrete target network.
struct NetSpec {
    int input_dim = 2;
    int output_dim = 2;
    int hidden_layers = 1;  // in [1, 5]
    int hidden_width = 5;

    void validate() const;
};

// Range the target generator draws from; the layer count is sampled
// uniformly per network.
struct TargetTemplate {
    int input_dim = 2;
    int output_dim = 2;
    int hidden_width = 5;
    int layers_min = 1;
    int layers_max = 5;

    void validate() const;
};

struct DenseLayer {
    Matrix w;
    std::vector<double> b;
};

// The target network G: plain dense layers, tanh on hidden layers, linear
// output. Generated once, then frozen; it is consumed through its
// input-output map and its parameters are never registered as trainable.
struct DenseNetwork {
    NetSpec spec;
    std::vector<DenseLayer> layers;  // hidden_layers + 1
    uint64_t seed = 0;               // substream that produced the parameters

    // Plain forward evaluation, no graph.
    std::vector<double> eval(std::span<const double> x) const;
};

// Draws hidden_layers uniformly from [layers_min, layers_max] and every
// weight and bias i.i.d. uniform on [-1, 1]. Consumes exactly one draw from
// `rng` (the substream seed), so the caller's stream advances by a fixed
// amount per network.
DenseNetwork generate_nn(Rng& rng, const TargetTemplate& tmpl);

// Graph-resident evaluation of G; differentiable with respect to x, while
// G's parameters contribute no gradients.
VecNode dense_forward(Graph& g, const DenseNetwork& net, VecNode x);

// Total scalar count of all weights and biases.
size_t param_count(const DenseNetwork& net);

// Smallest parameter count any network drawn from the template can have.
size_t min_param_count(const TargetTemplate& tmpl);

// i.i.d. Gaussian samples, mean 0, standard deviation 10 (variance 100).
std::vector<double> random_input(Rng& rng, int dim);

// One dense layer whose weight and bias live in a parameter store.
struct DenseLayerRef {
    ParamId w = -1, b = -1;
    int in_dim = 0, out_dim = 0;
};

enum class MetaConnectivity { Dense, Chain };

struct MetaNetConfig {
    int meta_dim = 16;
    int input_dim = 2;
    int output_dim = 2;
    int hidden_layers = 3;
    int hidden_width = 128;
    MetaConnectivity connectivity = MetaConnectivity::Dense;
    // Initialization is uniform [-g/sqrt(fan_in), g/sqrt(fan_in)]. The
    // default puts the first layer near the same weight scale as the target
    // networks this net emulates, so its units start in the same
    // mixed-saturation regime under wide-range inputs.
    double init_gain = 4.0;

    void validate() const;
};

// Meta-parameterized network: the meta vector is concatenated into every
// layer's input, so it selects which function of x the network computes.
// Dense connectivity feeds each layer the outputs of all previous layers;
// chain connectivity feeds only the immediately preceding one.
struct MetaNetwork {
    MetaNetConfig cfg;
    std::vector<DenseLayerRef> layers;  // hidden_layers + 1, last linear
};

// Registers trainable parameters in `params` (uniform [-1/sqrt(fan_in),
// 1/sqrt(fan_in)]) and returns the layer plan.
MetaNetwork meta_init(Rng& rng, const MetaNetConfig& cfg, ParamStore& params);

// Differentiable w.r.t. x, x_meta, and the network's parameters.
VecNode meta_forward(Graph& g, const MetaNetwork& mn, VecNode x, VecNode x_meta);

}  // namespace nnpnn

#endif
