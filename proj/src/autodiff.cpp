#include "nnpnn/autodiff.hpp"

#include <cmath>
#include <cstdio>

namespace nnpnn {

namespace {

const char* op_name(int kind) {
    switch (kind) {
        case 0: return "leaf";
        case 1: return "param_leaf";
        case 2: return "affine";
        case 3: return "affine";
        case 4: return "tanh";
        case 5: return "concat";
        case 6: return "slice";
        case 7: return "mae_loss";
        case 8: return "mse_loss";
        case 9: return "mean_all";
        default: return "?";
    }
}

std::string provenance(int node_id, int kind) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "node %d (%s)", node_id, op_name(kind));
    return buf;
}

void check_finite(std::span<const double> v, int node_id, int kind, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw ValueError(std::string("non-finite ") + what + " at " +
                             provenance(node_id, kind));
        }
    }
}

}  // namespace

ParamId ParamStore::add(std::string name, int rows, int cols) {
    if (rows < 0 || cols < 0) {
        throw ShapeError("ParamStore::add: negative shape for '" + name + "'");
    }
    Entry e{std::move(name), rows, cols, data_.size()};
    entries_.push_back(e);
    data_.resize(data_.size() + static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0);
    return static_cast<ParamId>(entries_.size()) - 1;
}

std::span<double> ParamStore::values(ParamId id) {
    const Entry& e = entries_.at(id);
    return std::span<double>(data_).subspan(e.offset,
                                            static_cast<size_t>(e.rows) * e.cols);
}

std::span<const double> ParamStore::values(ParamId id) const {
    const Entry& e = entries_.at(id);
    return std::span<const double>(data_).subspan(e.offset,
                                                  static_cast<size_t>(e.rows) * e.cols);
}

int Graph::push(Node&& n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

const Graph::Node& Graph::node(VecNode ref) const {
    if (ref.id < 0 || ref.id >= static_cast<int>(nodes_.size())) {
        throw ShapeError("node handle does not belong to this graph");
    }
    const Node& n = nodes_[ref.id];
    if (n.dim != ref.dim) {
        throw ShapeError("stale node handle: dimension mismatch");
    }
    return n;
}

void Graph::require_store(const char* op) const {
    if (params_ == nullptr) {
        throw ShapeError(std::string(op) + ": graph has no parameter store");
    }
}

VecNode Graph::leaf(std::span<const double> x) {
    Node n{OpKind::Leaf, static_cast<int>(x.size()), {x.begin(), x.end()}, {}, {}, {}, -1, -1, false, 0};
    int id = push(std::move(n));
    check_finite(nodes_[id].value, id, 0, "input");
    return {id, static_cast<int>(x.size())};
}

VecNode Graph::param_leaf(ParamId id) {
    require_store("param_leaf");
    auto v = params_->values(id);
    Node n{OpKind::ParamLeaf, static_cast<int>(v.size()), {v.begin(), v.end()}, {}, {}, {},
           id, -1, true, 0};
    int nid = push(std::move(n));
    check_finite(nodes_[nid].value, nid, 1, "parameter");
    return {nid, static_cast<int>(v.size())};
}

const std::vector<double>& Graph::value(VecNode n) const { return node(n).value; }

double Graph::scalar_value(VecNode n) const {
    const Node& nd = node(n);
    if (nd.dim != 1) throw ShapeError("scalar_value: node is not scalar");
    return nd.value[0];
}

namespace {

std::vector<double> affine_eval(const Matrix& w, std::span<const double> b,
                                std::span<const double> x) {
    std::vector<double> y(w.rows);
    for (int r = 0; r < w.rows; ++r) {
        double acc = 0.0;
        const double* row = w.a.data() + static_cast<size_t>(r) * w.cols;
        for (int c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] = acc + b[r];
    }
    return y;
}

}  // namespace

VecNode affine(Graph& g, const Matrix& w, std::span<const double> b, VecNode x) {
    const auto& xn = g.node(x);
    if (w.cols != x.dim) {
        throw ShapeError("affine: weight cols " + std::to_string(w.cols) +
                         " != input dim " + std::to_string(x.dim));
    }
    if (static_cast<int>(b.size()) != w.rows) {
        throw ShapeError("affine: bias dim " + std::to_string(b.size()) +
                         " != weight rows " + std::to_string(w.rows));
    }
    check_finite(w.a, static_cast<int>(g.nodes_.size()), 2, "weight");
    check_finite(b, static_cast<int>(g.nodes_.size()), 2, "bias");

    Graph::Node n{Graph::OpKind::AffineFrozen, w.rows, affine_eval(w, b, xn.value),
                  {x.id}, w, {b.begin(), b.end()}, -1, -1, false, 0};
    int id = g.push(std::move(n));
    check_finite(g.nodes_[id].value, id, 2, "output");
    return {id, w.rows};
}

VecNode affine(Graph& g, ParamId w, ParamId b, VecNode x, bool trainable) {
    g.require_store("affine");
    const ParamStore& ps = *g.params_;
    const auto& xn = g.node(x);
    Matrix wm;  // dims only; values read from the store at eval/backward time
    wm.rows = ps.rows(w);
    wm.cols = ps.cols(w);
    if (wm.cols != x.dim) {
        throw ShapeError("affine: weight cols " + std::to_string(wm.cols) +
                         " != input dim " + std::to_string(x.dim));
    }
    auto bv = ps.values(b);
    if (static_cast<int>(bv.size()) != wm.rows) {
        throw ShapeError("affine: bias size " + std::to_string(bv.size()) +
                         " != weight rows " + std::to_string(wm.rows));
    }

    std::vector<double> y(wm.rows);
    auto wv = ps.values(w);
    for (int r = 0; r < wm.rows; ++r) {
        double acc = 0.0;
        const double* row = wv.data() + static_cast<size_t>(r) * wm.cols;
        for (int c = 0; c < wm.cols; ++c) acc += row[c] * xn.value[c];
        y[r] = acc + bv[r];
    }

    Graph::Node n{Graph::OpKind::AffineParam, wm.rows, std::move(y), {x.id}, std::move(wm),
                  {}, w, b, trainable, 0};
    int id = g.push(std::move(n));
    check_finite(g.nodes_[id].value, id, 3, "output");
    return {id, g.nodes_[id].dim};
}

VecNode tanh_act(Graph& g, VecNode x) {
    const auto& xn = g.node(x);
    std::vector<double> y(xn.value.size());
    for (size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(xn.value[i]);
    Graph::Node n{Graph::OpKind::Tanh, x.dim, std::move(y), {x.id}, {}, {}, -1, -1, false, 0};
    int id = g.push(std::move(n));
    check_finite(g.nodes_[id].value, id, 4, "output");
    return {id, x.dim};
}

VecNode concat(Graph& g, std::span<const VecNode> parts) {
    if (parts.empty()) throw ShapeError("concat: no parts");
    std::vector<double> y;
    std::vector<int> inputs;
    inputs.reserve(parts.size());
    for (const VecNode& p : parts) {
        const auto& pn = g.node(p);
        y.insert(y.end(), pn.value.begin(), pn.value.end());
        inputs.push_back(p.id);
    }
    int dim = static_cast<int>(y.size());
    Graph::Node n{Graph::OpKind::Concat, dim, std::move(y), std::move(inputs),
                  {}, {}, -1, -1, false, 0};
    int id = g.push(std::move(n));
    return {id, dim};
}

VecNode concat(Graph& g, std::initializer_list<VecNode> parts) {
    return concat(g, std::span<const VecNode>(parts.begin(), parts.size()));
}

VecNode slice(Graph& g, VecNode x, int offset, int len) {
    const auto& xn = g.node(x);
    if (offset < 0 || len < 0 || offset + len > x.dim) {
        throw ShapeError("slice: window [" + std::to_string(offset) + ", " +
                         std::to_string(offset + len) + ") outside dim " +
                         std::to_string(x.dim));
    }
    std::vector<double> y(xn.value.begin() + offset, xn.value.begin() + offset + len);
    Graph::Node n{Graph::OpKind::Slice, len, std::move(y), {x.id}, {}, {}, -1, -1, false,
                  offset};
    int id = g.push(std::move(n));
    return {id, len};
}

namespace {

void check_loss_dims(VecNode pred, std::span<const double> target, const char* op) {
    if (static_cast<int>(target.size()) != pred.dim) {
        throw ShapeError(std::string(op) + ": target dim " + std::to_string(target.size()) +
                         " != prediction dim " + std::to_string(pred.dim));
    }
    if (pred.dim == 0) throw ShapeError(std::string(op) + ": empty prediction");
}

}  // namespace

VecNode mae_loss(Graph& g, VecNode pred, std::span<const double> target) {
    check_loss_dims(pred, target, "mae_loss");
    const auto& pn = g.node(pred);
    double acc = 0.0;
    for (int i = 0; i < pred.dim; ++i) acc += std::abs(pn.value[i] - target[i]);
    Graph::Node n{Graph::OpKind::MaeLoss, 1, {acc}, {pred.id}, {},
                  {target.begin(), target.end()}, -1, -1, false, 0};
    int id = g.push(std::move(n));
    check_finite(g.nodes_[id].value, id, 7, "output");
    return {id, 1};
}

VecNode mse_loss(Graph& g, VecNode pred, std::span<const double> target) {
    check_loss_dims(pred, target, "mse_loss");
    const auto& pn = g.node(pred);
    double acc = 0.0;
    for (int i = 0; i < pred.dim; ++i) {
        double d = pn.value[i] - target[i];
        acc += d * d;
    }
    acc /= pred.dim;
    Graph::Node n{Graph::OpKind::MseLoss, 1, {acc}, {pred.id}, {},
                  {target.begin(), target.end()}, -1, -1, false, 0};
    int id = g.push(std::move(n));
    check_finite(g.nodes_[id].value, id, 8, "output");
    return {id, 1};
}

VecNode mean_all(Graph& g, std::span<const VecNode> parts) {
    if (parts.empty()) throw ShapeError("mean_all: no parts");
    double acc = 0.0;
    int total = 0;
    std::vector<int> inputs;
    inputs.reserve(parts.size());
    for (const VecNode& p : parts) {
        const auto& pn = g.node(p);
        for (double v : pn.value) acc += v;
        total += p.dim;
        inputs.push_back(p.id);
    }
    if (total == 0) throw ShapeError("mean_all: zero total dimension");
    acc /= total;
    Graph::Node n{Graph::OpKind::MeanAll, 1, {acc}, std::move(inputs), {}, {}, -1, -1,
                  false, total};
    int id = g.push(std::move(n));
    check_finite(g.nodes_[id].value, id, 9, "output");
    return {id, 1};
}

GradientMap backward(Graph& g, VecNode loss) {
    const auto& ln = g.node(loss);
    if (ln.dim != 1) throw ShapeError("backward: loss is not scalar");

    GradientMap gm;
    gm.flat.assign(g.params_ ? g.params_->size() : 0, 0.0);

    std::vector<std::vector<double>> adj(g.nodes_.size());
    adj[loss.id] = {1.0};

    auto adj_of = [&](int id) -> std::vector<double>& {
        if (adj[id].empty()) adj[id].assign(g.nodes_[id].value.size(), 0.0);
        return adj[id];
    };

    for (int i = loss.id; i >= 0; --i) {
        if (adj[i].empty()) continue;
        const Graph::Node& n = g.nodes_[i];
        const std::vector<double>& dy = adj[i];
        check_finite(dy, i, static_cast<int>(n.kind), "adjoint");

        switch (n.kind) {
            case Graph::OpKind::Leaf:
                break;
            case Graph::OpKind::ParamLeaf: {
                if (n.trainable) {
                    size_t off = g.params_->offset(n.wid);
                    for (size_t k = 0; k < dy.size(); ++k) gm.flat[off + k] += dy[k];
                }
                break;
            }
            case Graph::OpKind::AffineFrozen: {
                auto& dx = adj_of(n.inputs[0]);
                for (int r = 0; r < n.w.rows; ++r) {
                    const double* row = n.w.a.data() + static_cast<size_t>(r) * n.w.cols;
                    for (int c = 0; c < n.w.cols; ++c) dx[c] += row[c] * dy[r];
                }
                break;
            }
            case Graph::OpKind::AffineParam: {
                const ParamStore& ps = *g.params_;
                auto wv = ps.values(n.wid);
                const auto& xv = g.nodes_[n.inputs[0]].value;
                auto& dx = adj_of(n.inputs[0]);
                for (int r = 0; r < n.w.rows; ++r) {
                    const double* row = wv.data() + static_cast<size_t>(r) * n.w.cols;
                    for (int c = 0; c < n.w.cols; ++c) dx[c] += row[c] * dy[r];
                }
                if (n.trainable) {
                    size_t woff = ps.offset(n.wid);
                    size_t boff = ps.offset(n.bid);
                    for (int r = 0; r < n.w.rows; ++r) {
                        double* grow = gm.flat.data() + woff + static_cast<size_t>(r) * n.w.cols;
                        for (int c = 0; c < n.w.cols; ++c) grow[c] += dy[r] * xv[c];
                        gm.flat[boff + r] += dy[r];
                    }
                }
                break;
            }
            case Graph::OpKind::Tanh: {
                auto& dx = adj_of(n.inputs[0]);
                for (size_t k = 0; k < dy.size(); ++k) {
                    double y = n.value[k];
                    dx[k] += dy[k] * (1.0 - y * y);
                }
                break;
            }
            case Graph::OpKind::Concat: {
                size_t pos = 0;
                for (int in : n.inputs) {
                    auto& dx = adj_of(in);
                    for (size_t k = 0; k < dx.size(); ++k) dx[k] += dy[pos + k];
                    pos += dx.size();
                }
                break;
            }
            case Graph::OpKind::Slice: {
                auto& dx = adj_of(n.inputs[0]);
                for (size_t k = 0; k < dy.size(); ++k) dx[n.offset + k] += dy[k];
                break;
            }
            case Graph::OpKind::MaeLoss: {
                const auto& pv = g.nodes_[n.inputs[0]].value;
                auto& dx = adj_of(n.inputs[0]);
                for (size_t k = 0; k < pv.size(); ++k) {
                    double d = pv[k] - n.aux[k];
                    double s = (d > 0.0) ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                    dx[k] += dy[0] * s;
                }
                break;
            }
            case Graph::OpKind::MseLoss: {
                const auto& pv = g.nodes_[n.inputs[0]].value;
                auto& dx = adj_of(n.inputs[0]);
                double scale = 2.0 / static_cast<double>(pv.size());
                for (size_t k = 0; k < pv.size(); ++k) {
                    dx[k] += dy[0] * scale * (pv[k] - n.aux[k]);
                }
                break;
            }
            case Graph::OpKind::MeanAll: {
                double share = dy[0] / static_cast<double>(n.offset);
                for (int in : n.inputs) {
                    auto& dx = adj_of(in);
                    for (double& dv : dx) dv += share;
                }
                break;
            }
        }
    }
    return gm;
}

double finite_diff_check(const LossBuilder& build, ParamStore& params, double eps) {
    if (eps <= 0.0) throw ConfigError("finite_diff_check: eps must be positive");

    GradientMap gm;
    {
        Graph g(&params);
        VecNode loss = build(g, params);
        if (loss.dim != 1) throw ShapeError("finite_diff_check: loss is not scalar");
        gm = backward(g, loss);
    }

    auto value_at = [&]() {
        Graph g(&params);
        return g.scalar_value(build(g, params));
    };

    double max_rel = 0.0;
    auto flat = params.flat();
    for (size_t k = 0; k < flat.size(); ++k) {
        double orig = flat[k];
        flat[k] = orig + eps;
        double fp = value_at();
        flat[k] = orig - eps;
        double fm = value_at();
        flat[k] = orig;
        double numeric = (fp - fm) / (2.0 * eps);
        double analytic = gm.flat[k];
        double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    }
    return max_rel;
}

}  // namespace nnpnn
