#ifndef NNPNN_AUTODIFF_HPP
#define NNPNN_AUTODIFF_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nnpnn/errors.hpp"
#include "nnpnn/tensor.hpp"

namespace nnpnn {

using ParamId = int;

// Flat storage for trainable parameters. Every tensor occupies a contiguous
// segment of one array; the segment order fixes the layout that gradient
// maps, optimizer state and checkpoints all share. Register everything
// before building graphs against the store.
class ParamStore {
  public:
    ParamId add(std::string name, int rows, int cols);

    int num_params() const { return static_cast<int>(entries_.size()); }
    size_t size() const { return data_.size(); }  // total scalar count

    std::span<double> values(ParamId id);
    std::span<const double> values(ParamId id) const;
    int rows(ParamId id) const { return entries_.at(id).rows; }
    int cols(ParamId id) const { return entries_.at(id).cols; }
    size_t offset(ParamId id) const { return entries_.at(id).offset; }
    const std::string& name(ParamId id) const { return entries_.at(id).name; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

  private:
    struct Entry {
        std::string name;
        int rows, cols;
        size_t offset;
    };
    std::vector<Entry> entries_;
    std::vector<double> data_;
};

// Gradients of one backward pass, laid out exactly like the store's flat
// array. Untouched parameters hold zeros.
struct GradientMap {
    std::vector<double> flat;

    std::span<const double> of(const ParamStore& store, ParamId id) const {
        return std::span<const double>(flat).subspan(
            store.offset(id), store.values(id).size());
    }
};

// Handle to a vector-valued node. The dimension is fixed at creation and
// revalidated by every consuming operation.
struct VecNode {
    int id = -1;
    int dim = 0;
};

// Append-only record of one forward computation. Node inputs always point
// to earlier nodes, so the tape order is already topological and backward
// is a single reverse sweep. Any non-finite value aborts immediately with
// the offending node's provenance. A graph is single-writer; independent
// graphs are fully parallel.
class Graph {
  public:
    // `params`, when given, backs trainable operations; it must outlive the
    // graph and must not be mutated between forward and backward.
    explicit Graph(const ParamStore* params = nullptr) : params_(params) {}

    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // Constant input vector (no gradient).
    VecNode leaf(std::span<const double> x);
    // Trainable vector parameter read from the store.
    VecNode param_leaf(ParamId id);

    const std::vector<double>& value(VecNode n) const;
    double scalar_value(VecNode n) const;  // requires dim == 1

    const ParamStore* params() const { return params_; }
    size_t num_nodes() const { return nodes_.size(); }

  private:
    enum class OpKind : uint8_t {
        Leaf,
        ParamLeaf,
        AffineFrozen,
        AffineParam,
        Tanh,
        Concat,
        Slice,
        MaeLoss,
        MseLoss,
        MeanAll,
    };

    struct Node {
        OpKind kind;
        int dim;
        std::vector<double> value;
        std::vector<int> inputs;
        Matrix w;                       // AffineFrozen weights
        std::vector<double> aux;        // AffineFrozen bias, or loss target
        ParamId wid = -1, bid = -1;     // AffineParam / ParamLeaf parameter ids
        bool trainable = false;
        int offset = 0;                 // Slice start
    };

    std::vector<Node> nodes_;
    const ParamStore* params_;

    int push(Node&& n);
    const Node& node(VecNode ref) const;
    void require_store(const char* op) const;

    friend VecNode affine(Graph&, const Matrix&, std::span<const double>, VecNode);
    friend VecNode affine(Graph&, ParamId, ParamId, VecNode, bool);
    friend VecNode tanh_act(Graph&, VecNode);
    friend VecNode concat(Graph&, std::span<const VecNode>);
    friend VecNode slice(Graph&, VecNode, int, int);
    friend VecNode mae_loss(Graph&, VecNode, std::span<const double>);
    friend VecNode mse_loss(Graph&, VecNode, std::span<const double>);
    friend VecNode mean_all(Graph&, std::span<const VecNode>);
    friend GradientMap backward(Graph&, VecNode);
};

// y = W x + b with constant coefficients; gradients flow through x only.
VecNode affine(Graph& g, const Matrix& w, std::span<const double> b, VecNode x);

// y = W x + b with store-backed coefficients; when `trainable`, dW and db
// are accumulated into the gradient map under their parameter ids.
VecNode affine(Graph& g, ParamId w, ParamId b, VecNode x, bool trainable = true);

// Componentwise hyperbolic tangent.
VecNode tanh_act(Graph& g, VecNode x);

// Concatenation in the given order; zero-dimensional parts are allowed.
VecNode concat(Graph& g, std::span<const VecNode> parts);
VecNode concat(Graph& g, std::initializer_list<VecNode> parts);

// Contiguous coordinate window [offset, offset + len).
VecNode slice(Graph& g, VecNode x, int offset, int len);

// Sum of absolute errors (sum convention, not mean).
VecNode mae_loss(Graph& g, VecNode pred, std::span<const double> target);

// Mean of squared errors.
VecNode mse_loss(Graph& g, VecNode pred, std::span<const double> target);

// Scalar mean over the concatenation of the given nodes; used to average
// per-draw losses when batching.
VecNode mean_all(Graph& g, std::span<const VecNode> parts);

// Reverse sweep from a scalar loss. Adjoints accumulate in deterministic
// reverse node order, so repeated runs are bitwise identical.
GradientMap backward(Graph& g, VecNode loss);

// Builds a scalar loss on a fresh graph from the store's current values.
using LossBuilder = std::function<VecNode(Graph&, const ParamStore&)>;

// Max relative error between the analytic gradient and central finite
// differences over every scalar in the store. The denominator is floored
// at 1e-8 to avoid 0/0.
double finite_diff_check(const LossBuilder& build, ParamStore& params, double eps);

}  // namespace nnpnn

#endif
