#include "engine/engine.hpp"

#include "support/error.hpp"
#include "support/fnv.hpp"
#include "support/rng.hpp"

#include <algorithm>
#include <cmath>

namespace graft {

ParamStore init_params(const Graph& graph, InitMode mode, uint64_t seed) {
    ParamStore store;
    for (const auto& [name, id] : graph.params()) {
        const Node& n = graph.node(id);
        Tensor t;
        t.shape = n.shape;
        t.data.resize(static_cast<size_t>(elem_count(n.shape)));

        Rng rng(mix_seed(seed, fnv1a64(name)));
        double fan_in = static_cast<double>(graph.param_fan_in(id));
        if (mode == InitMode::Positive && graph.param_is_bias(id)) {
            std::fill(t.data.begin(), t.data.end(), 0.0);
        } else if (mode == InitMode::Positive) {
            for (double& v : t.data) v = rng.uniform(0.1, 1.0) / fan_in;
        } else {
            for (double& v : t.data) v = rng.uniform(-1.0, 1.0) / fan_in;
        }
        store.tensors.emplace(name, std::move(t));
    }
    return store;
}

namespace {

struct PoolWindows {
    int64_t rows, in_len, out_len, window, stride;
};

PoolWindows pool_geometry(const Shape& in, const Node& n) {
    int64_t rows = in.size() == 2 ? in[0] : 1;
    int64_t len = in.back();
    return {rows, len, (len - n.window) / n.stride + 1, n.window, n.stride};
}

// flat offsets of an element-wise binary op with optional row-vector broadcast
struct Broadcast {
    int64_t rows, cols;
    bool a_is_row, b_is_row;  // true when the operand is the [cols] vector
};

Broadcast broadcast_geometry(const Shape& a, const Shape& b, const Shape& out) {
    Broadcast g{};
    g.rows = out.size() == 2 ? out[0] : 1;
    g.cols = out.back();
    g.a_is_row = a.size() == 1 && out.size() == 2;
    g.b_is_row = b.size() == 1 && out.size() == 2;
    return g;
}

void check_finite(const std::vector<double>& buf, const Node& n, const char* what) {
    for (double v : buf)
        if (!std::isfinite(v))
            fail(ErrorKind::Numeric, std::string("non-finite ") + what + " at node " +
                                         std::to_string(n.id) + " (" + kind_name(n.kind) + ")");
}

} // namespace

ForwardResult forward(const Graph& graph, const ParamStore& params, const InputMap& inputs) {
    Tape tape;
    tape.values.resize(graph.size());

    for (const Node& n : graph.nodes()) {
        const Shape& out_shape = graph.shape(n.id);
        std::vector<double>& out = tape.values[static_cast<size_t>(n.id)];
        out.assign(static_cast<size_t>(elem_count(out_shape)), 0.0);
        auto arg = [&](size_t i) -> const std::vector<double>& {
            return tape.values[static_cast<size_t>(n.inputs[i])];
        };
        auto arg_shape = [&](size_t i) -> const Shape& { return graph.shape(n.inputs[i]); };

        switch (n.kind) {
            case OpKind::Input: {
                auto it = inputs.find(n.id);
                if (it == inputs.end())
                    fail(ErrorKind::InvalidArg, "no value supplied for input node " + std::to_string(n.id));
                if (it->second.shape != n.shape)
                    fail(ErrorKind::Shape, "input node " + std::to_string(n.id) + " expects " +
                                               shape_str(n.shape) + ", got " + shape_str(it->second.shape));
                for (double v : it->second.data)
                    if (std::isnan(v))
                        fail(ErrorKind::Numeric, "NaN in value for input node " + std::to_string(n.id));
                out = it->second.data;
                break;
            }
            case OpKind::Param: {
                auto it = params.tensors.find(n.param_name);
                if (it == params.tensors.end())
                    fail(ErrorKind::InvalidArg, "param store is missing tensor \"" + n.param_name + "\"");
                if (it->second.shape != n.shape)
                    fail(ErrorKind::Shape, "tensor \"" + n.param_name + "\" has shape " +
                                               shape_str(it->second.shape) + ", graph declares " +
                                               shape_str(n.shape));
                out = it->second.data;
                break;
            }
            case OpKind::Matmul: {
                int64_t N = arg_shape(0)[1], M = arg_shape(1)[1];
                const auto& x = arg(0);
                const auto& w = arg(1);
                for (int64_t k = 0; k < M; ++k) {
                    double acc = 0.0;
                    for (int64_t i = 0; i < N; ++i) acc += x[static_cast<size_t>(i)] * w[static_cast<size_t>(i * M + k)];
                    out[static_cast<size_t>(k)] = acc;
                }
                break;
            }
            case OpKind::Add:
            case OpKind::Mul: {
                Broadcast g = broadcast_geometry(arg_shape(0), arg_shape(1), out_shape);
                const auto& a = arg(0);
                const auto& b = arg(1);
                for (int64_t r = 0; r < g.rows; ++r)
                    for (int64_t c = 0; c < g.cols; ++c) {
                        double av = a[static_cast<size_t>(g.a_is_row ? c : r * g.cols + c)];
                        double bv = b[static_cast<size_t>(g.b_is_row ? c : r * g.cols + c)];
                        out[static_cast<size_t>(r * g.cols + c)] = n.kind == OpKind::Add ? av + bv : av * bv;
                    }
                break;
            }
            case OpKind::Concat: {
                // row-major copy along the concat axis
                int64_t rank = static_cast<int64_t>(out_shape.size());
                if (n.axis == rank - 1) {
                    int64_t rows = rank == 2 ? out_shape[0] : 1;
                    int64_t out_cols = out_shape.back();
                    int64_t col0 = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        int64_t cols = arg_shape(i).back();
                        const auto& src = arg(i);
                        for (int64_t r = 0; r < rows; ++r)
                            for (int64_t c = 0; c < cols; ++c)
                                out[static_cast<size_t>(r * out_cols + col0 + c)] =
                                    src[static_cast<size_t>(r * cols + c)];
                        col0 += cols;
                    }
                } else {  // axis 0 of rank-2: stack rows
                    size_t off = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        const auto& src = arg(i);
                        std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
                        off += src.size();
                    }
                }
                break;
            }
            case OpKind::Slice: {
                const Shape& s = arg_shape(0);
                const auto& src = arg(0);
                if (s.size() == 1) {
                    for (int64_t i = n.begin[0]; i < n.end[0]; ++i)
                        out[static_cast<size_t>(i - n.begin[0])] = src[static_cast<size_t>(i)];
                } else {
                    int64_t cols = s[1], out_cols = n.end[1] - n.begin[1];
                    for (int64_t r = n.begin[0]; r < n.end[0]; ++r)
                        for (int64_t c = n.begin[1]; c < n.end[1]; ++c)
                            out[static_cast<size_t>((r - n.begin[0]) * out_cols + (c - n.begin[1]))] =
                                src[static_cast<size_t>(r * cols + c)];
                }
                break;
            }
            case OpKind::Sigmoid:
                for (size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-arg(0)[i]));
                break;
            case OpKind::Tanh:
                for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(arg(0)[i]);
                break;
            case OpKind::Relu:
                for (size_t i = 0; i < out.size(); ++i) out[i] = std::max(arg(0)[i], 0.0);
                break;
            case OpKind::AvgPool:
            case OpKind::MaxPool: {
                PoolWindows p = pool_geometry(arg_shape(0), n);
                const auto& src = arg(0);
                for (int64_t r = 0; r < p.rows; ++r)
                    for (int64_t o = 0; o < p.out_len; ++o) {
                        int64_t base = r * p.in_len + o * p.stride;
                        double acc = n.kind == OpKind::AvgPool ? 0.0 : src[static_cast<size_t>(base)];
                        for (int64_t w = 0; w < p.window; ++w) {
                            double v = src[static_cast<size_t>(base + w)];
                            acc = n.kind == OpKind::AvgPool ? acc + v : std::max(acc, v);
                        }
                        out[static_cast<size_t>(r * p.out_len + o)] =
                            n.kind == OpKind::AvgPool ? acc / static_cast<double>(p.window) : acc;
                    }
                break;
            }
            case OpKind::Sum: {
                double acc = 0.0;
                for (double v : arg(0)) acc += v;
                out[0] = acc;
                break;
            }
        }
        check_finite(out, n, "value");
    }

    ForwardResult res;
    res.tape = std::move(tape);
    for (int64_t id : graph.outputs()) {
        Tensor t;
        t.shape = graph.shape(id);
        t.data = res.tape.values[static_cast<size_t>(id)];
        res.outputs.push_back(std::move(t));
    }
    return res;
}

GradStore backward(const Graph& graph, const Tape& tape) {
    std::vector<std::vector<double>> adj(graph.size());
    for (size_t i = 0; i < graph.size(); ++i) adj[i].assign(tape.values[i].size(), 0.0);
    for (int64_t id : graph.outputs())
        for (double& a : adj[static_cast<size_t>(id)]) a += 1.0;

    for (size_t ri = graph.size(); ri-- > 0;) {
        const Node& n = graph.node(static_cast<int64_t>(ri));
        const auto& dy = adj[ri];
        auto val = [&](size_t i) -> const std::vector<double>& {
            return tape.values[static_cast<size_t>(n.inputs[i])];
        };
        auto grad = [&](size_t i) -> std::vector<double>& {
            return adj[static_cast<size_t>(n.inputs[i])];
        };
        auto arg_shape = [&](size_t i) -> const Shape& { return graph.shape(n.inputs[i]); };

        switch (n.kind) {
            case OpKind::Input:
            case OpKind::Param:
                break;
            case OpKind::Matmul: {
                int64_t N = arg_shape(0)[1], M = arg_shape(1)[1];
                auto& dx = grad(0);
                auto& dw = grad(1);
                const auto& x = val(0);
                const auto& w = val(1);
                for (int64_t i = 0; i < N; ++i)
                    for (int64_t k = 0; k < M; ++k) {
                        double g = dy[static_cast<size_t>(k)];
                        dx[static_cast<size_t>(i)] += g * w[static_cast<size_t>(i * M + k)];
                        dw[static_cast<size_t>(i * M + k)] += g * x[static_cast<size_t>(i)];
                    }
                break;
            }
            case OpKind::Add:
            case OpKind::Mul: {
                Broadcast g = broadcast_geometry(arg_shape(0), arg_shape(1), graph.shape(n.id));
                auto& da = grad(0);
                auto& db = grad(1);
                const auto& a = val(0);
                const auto& b = val(1);
                for (int64_t r = 0; r < g.rows; ++r)
                    for (int64_t c = 0; c < g.cols; ++c) {
                        size_t oi = static_cast<size_t>(r * g.cols + c);
                        size_t ai = static_cast<size_t>(g.a_is_row ? c : r * g.cols + c);
                        size_t bi = static_cast<size_t>(g.b_is_row ? c : r * g.cols + c);
                        if (n.kind == OpKind::Add) {
                            da[ai] += dy[oi];
                            db[bi] += dy[oi];
                        } else {
                            da[ai] += dy[oi] * b[bi];
                            db[bi] += dy[oi] * a[ai];
                        }
                    }
                break;
            }
            case OpKind::Concat: {
                int64_t rank = static_cast<int64_t>(graph.shape(n.id).size());
                if (n.axis == rank - 1) {
                    int64_t rows = rank == 2 ? graph.shape(n.id)[0] : 1;
                    int64_t out_cols = graph.shape(n.id).back();
                    int64_t col0 = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        int64_t cols = arg_shape(i).back();
                        auto& dsrc = grad(i);
                        for (int64_t r = 0; r < rows; ++r)
                            for (int64_t c = 0; c < cols; ++c)
                                dsrc[static_cast<size_t>(r * cols + c)] +=
                                    dy[static_cast<size_t>(r * out_cols + col0 + c)];
                        col0 += cols;
                    }
                } else {
                    size_t off = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        auto& dsrc = grad(i);
                        for (size_t k = 0; k < dsrc.size(); ++k) dsrc[k] += dy[off + k];
                        off += dsrc.size();
                    }
                }
                break;
            }
            case OpKind::Slice: {
                const Shape& s = arg_shape(0);
                auto& dsrc = grad(0);
                if (s.size() == 1) {
                    for (int64_t i = n.begin[0]; i < n.end[0]; ++i)
                        dsrc[static_cast<size_t>(i)] += dy[static_cast<size_t>(i - n.begin[0])];
                } else {
                    int64_t cols = s[1], out_cols = n.end[1] - n.begin[1];
                    for (int64_t r = n.begin[0]; r < n.end[0]; ++r)
                        for (int64_t c = n.begin[1]; c < n.end[1]; ++c)
                            dsrc[static_cast<size_t>(r * cols + c)] +=
                                dy[static_cast<size_t>((r - n.begin[0]) * out_cols + (c - n.begin[1]))];
                }
                break;
            }
            case OpKind::Sigmoid: {
                const auto& y = tape.values[ri];
                auto& dz = grad(0);
                for (size_t i = 0; i < dy.size(); ++i) dz[i] += dy[i] * y[i] * (1.0 - y[i]);
                break;
            }
            case OpKind::Tanh: {
                const auto& y = tape.values[ri];
                auto& dz = grad(0);
                for (size_t i = 0; i < dy.size(); ++i) dz[i] += dy[i] * (1.0 - y[i] * y[i]);
                break;
            }
            case OpKind::Relu: {
                const auto& z = val(0);
                auto& dz = grad(0);
                for (size_t i = 0; i < dy.size(); ++i) dz[i] += z[i] > 0.0 ? dy[i] : 0.0;
                break;
            }
            case OpKind::AvgPool: {
                PoolWindows p = pool_geometry(arg_shape(0), n);
                auto& dsrc = grad(0);
                for (int64_t r = 0; r < p.rows; ++r)
                    for (int64_t o = 0; o < p.out_len; ++o) {
                        double g = dy[static_cast<size_t>(r * p.out_len + o)] / static_cast<double>(p.window);
                        int64_t base = r * p.in_len + o * p.stride;
                        for (int64_t w = 0; w < p.window; ++w) dsrc[static_cast<size_t>(base + w)] += g;
                    }
                break;
            }
            case OpKind::MaxPool: {
                PoolWindows p = pool_geometry(arg_shape(0), n);
                const auto& src = val(0);
                auto& dsrc = grad(0);
                for (int64_t r = 0; r < p.rows; ++r)
                    for (int64_t o = 0; o < p.out_len; ++o) {
                        int64_t base = r * p.in_len + o * p.stride;
                        int64_t best = base;
                        for (int64_t w = 1; w < p.window; ++w)
                            if (src[static_cast<size_t>(base + w)] > src[static_cast<size_t>(best)])
                                best = base + w;
                        dsrc[static_cast<size_t>(best)] += dy[static_cast<size_t>(r * p.out_len + o)];
                    }
                break;
            }
            case OpKind::Sum: {
                auto& dsrc = grad(0);
                for (double& g : dsrc) g += dy[0];
                break;
            }
        }
    }

    GradStore grads;
    for (const auto& [name, id] : graph.params()) {
        const Node& n = graph.node(id);
        check_finite(adj[static_cast<size_t>(id)], n, "gradient");
        Tensor t;
        t.shape = n.shape;
        t.data = adj[static_cast<size_t>(id)];
        grads.emplace(name, std::move(t));
    }
    return grads;
}

GradStore backward(const Graph& graph, const ParamStore& params, const InputMap& inputs) {
    return backward(graph, forward(graph, params, inputs).tape);
}

InputMap one_hot_inputs(const Graph& graph, uint32_t fid) {
    InputMap inputs;
    for (int64_t id : graph.input_ids()) {
        Tensor t;
        t.shape = graph.node(id).shape;
        t.data.assign(static_cast<size_t>(elem_count(t.shape)), 0.0);
        inputs.emplace(id, std::move(t));
    }
    auto [node, offset] = graph.feature_position(fid);
    inputs[node].data[static_cast<size_t>(offset)] = 1.0;
    return inputs;
}

SafeTransform mapping_safe_transform(const Graph& graph) {
    std::vector<Node> nodes = graph.nodes();
    std::vector<Substitution> subs;
    for (Node& n : nodes) {
        if (n.kind == OpKind::MaxPool) {
            subs.push_back({n.id, OpKind::MaxPool, OpKind::AvgPool});
            n.kind = OpKind::AvgPool;
        } else if (n.kind == OpKind::Sigmoid) {
            subs.push_back({n.id, OpKind::Sigmoid, OpKind::Tanh});
            n.kind = OpKind::Tanh;
        }
    }
    return {make_graph(std::move(nodes), graph.outputs()), std::move(subs)};
}

} // namespace graft
