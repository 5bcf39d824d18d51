#ifndef NNPNN_HOST_HPP
#define NNPNN_HOST_HPP

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nnpnn/autodiff.hpp"
#include "nnpnn/networks.hpp"
#include "nnpnn/rng.hpp"

namespace nnpnn {

// The host network F. It receives a target network and interacts with it
// only by querying its input->output map: each of l phases runs a
// processing block that emits r query vectors, reads the target on each,
// and passes the interleaved (read, query) pairs to the next phase. A final
// processing block turns the last phase's reads into the output.

struct NnpnnConfig {
    int l = 2;            // phase count
    int r = 4;            // queries per phase
    int input_dim = 2;    // 0 = no numeric input; the trainable seed vector feeds phase 1
    int seed_dim = 16;    // seed vector size when input_dim == 0
    int output_dim = 2;
    int query_dim = 2;    // target's input dim
    int read_dim = 2;     // target's output dim
    int w1 = 32;          // sub-block widths
    int w2 = 32;
    bool append_phase_input = true;  // also pass h_k forward alongside the pairs
    // Multiplier on the query heads' initialization, widening the span of
    // the initial probes; >1 is useful when informative target behaviour
    // lives far from the origin.
    double query_head_gain = 1.0;

    int phase1_input_dim() const { return input_dim > 0 ? input_dim : seed_dim; }
    void validate() const;
};

// Three dense layers: d1 processes the sub-block input, d2 the output of
// d1, and d3 the concatenation (input, d1 out, d2 out). All tanh except
// that a sub-block closing a query/output head keeps d3 linear so the
// emitted values are unbounded.
struct SubBlock {
    DenseLayerRef d1, d2, d3;
    bool linear_output = false;
};

// Two chained sub-blocks.
struct ProcessingBlock {
    SubBlock sb1, sb2;
};

struct Phase {
    ProcessingBlock block;  // emits r * query_dim values
};

struct Nnpnn {
    NnpnnConfig cfg;
    std::vector<Phase> phases;
    ProcessingBlock output_block;
    ParamId seed_vector = -1;  // phase-1 input when no numeric input is given
};

// One (query, read) pair recorded during a forward pass.
struct QueryRead {
    std::vector<double> query;
    std::vector<double> read;
};

struct NnpnnResult {
    VecNode output;
    std::vector<QueryRead> trace;  // l * r entries, phase-major
    // Values fed to phase 1..l and to the output block (l + 1 entries);
    // exposes the interleaved (read, query) layout for inspection.
    std::vector<std::vector<double>> phase_inputs;
};

// Registers all trainable parameters in `params` (uniform
// [-1/sqrt(fan_in), 1/sqrt(fan_in)]; seed vector zero) and returns the plan.
Nnpnn nnpnn_init(Rng& rng, const NnpnnConfig& cfg, ParamStore& params);

VecNode sub_block_forward(Graph& g, const SubBlock& sb, VecNode x);
VecNode block_forward(Graph& g, const ProcessingBlock& pb, VecNode x);

// Forward pass against a frozen target network. Gradients flow through
// every read. `x` must match cfg.input_dim when present; when absent the
// seed vector is used.
NnpnnResult nnpnn_forward(Graph& g, const Nnpnn& f,
                          std::optional<std::span<const double>> x,
                          const DenseNetwork& target);

// Same pass with an arbitrary read function; the architecture touches the
// target only through this hook, so a recorded lookup can stand in for it.
using ReadFn = std::function<VecNode(Graph&, VecNode query)>;
NnpnnResult nnpnn_forward_reads(Graph& g, const Nnpnn& f,
                                std::optional<std::span<const double>> x,
                                const ReadFn& read, int read_dim);

// Scalar count of all trainable parameters the config will register.
size_t nnpnn_param_count(const NnpnnConfig& cfg);

}  // namespace nnpnn

#endif
