#include "ir/types.hpp"

#include "support/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace graft {

int64_t elem_count(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

const char* kind_name(OpKind k) {
    switch (k) {
        case OpKind::Input: return "input";
        case OpKind::Param: return "param";
        case OpKind::Matmul: return "matmul";
        case OpKind::Add: return "add";
        case OpKind::Mul: return "mul";
        case OpKind::Concat: return "concat";
        case OpKind::Slice: return "slice";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Tanh: return "tanh";
        case OpKind::Relu: return "relu";
        case OpKind::AvgPool: return "avgpool";
        case OpKind::MaxPool: return "maxpool";
        case OpKind::Sum: return "sum";
    }
    return "?";
}

std::optional<OpKind> kind_from_name(std::string_view name) {
    static const std::pair<std::string_view, OpKind> table[] = {
        {"input", OpKind::Input},     {"param", OpKind::Param},   {"matmul", OpKind::Matmul},
        {"add", OpKind::Add},         {"mul", OpKind::Mul},       {"concat", OpKind::Concat},
        {"slice", OpKind::Slice},     {"sigmoid", OpKind::Sigmoid}, {"tanh", OpKind::Tanh},
        {"relu", OpKind::Relu},       {"avgpool", OpKind::AvgPool}, {"maxpool", OpKind::MaxPool},
        {"sum", OpKind::Sum},
    };
    for (const auto& [n, k] : table)
        if (n == name) return k;
    return std::nullopt;
}

namespace {

[[noreturn]] void shape_fail(const Node& n, const std::string& detail) {
    fail(ErrorKind::Shape,
         "node " + std::to_string(n.id) + " (" + kind_name(n.kind) + "): " + detail);
}

[[noreturn]] void node_fail(const Node& n, const std::string& detail) {
    fail(ErrorKind::Validate,
         "node " + std::to_string(n.id) + " (" + kind_name(n.kind) + "): " + detail);
}

void check_leaf_shape(const Node& n) {
    if (n.shape.empty() || n.shape.size() > 2)
        shape_fail(n, "shape must have rank 1 or 2, got " + shape_str(n.shape));
    for (int64_t d : n.shape)
        if (d < 1) shape_fail(n, "shape dimensions must be >= 1, got " + shape_str(n.shape));
}

Shape broadcast_shape(const Node& n, const Shape& a, const Shape& b) {
    if (a == b) return a;
    // tensor-plus-row-vector broadcast, either operand order
    if (a.size() == 2 && b.size() == 1 && a[1] == b[0]) return a;
    if (a.size() == 1 && b.size() == 2 && b[1] == a[0]) return b;
    shape_fail(n, "operand shapes " + shape_str(a) + " and " + shape_str(b) +
                      " are neither equal nor tensor-plus-row-vector");
}

} // namespace

std::vector<Shape> infer_shapes(const std::vector<Node>& nodes) {
    std::vector<Shape> shapes(nodes.size());
    auto in = [&](const Node& n, size_t i) -> const Shape& {
        return shapes[static_cast<size_t>(n.inputs[i])];
    };

    for (const Node& n : nodes) {
        Shape& out = shapes[static_cast<size_t>(n.id)];
        switch (n.kind) {
            case OpKind::Input:
            case OpKind::Param:
                check_leaf_shape(n);
                out = n.shape;
                break;
            case OpKind::Matmul: {
                const Shape& a = in(n, 0);
                const Shape& b = in(n, 1);
                if (a.size() != 2 || a[0] != 1)
                    shape_fail(n, "lhs must be [1,N], got " + shape_str(a));
                if (b.size() != 2)
                    shape_fail(n, "rhs must be [N,M], got " + shape_str(b));
                if (a[1] != b[0])
                    shape_fail(n, "cannot contract " + shape_str(a) + " with " + shape_str(b));
                out = {1, b[1]};
                break;
            }
            case OpKind::Add:
            case OpKind::Mul:
                out = broadcast_shape(n, in(n, 0), in(n, 1));
                break;
            case OpKind::Concat: {
                const Shape& first = in(n, 0);
                size_t rank = first.size();
                if (n.axis < 0 || static_cast<size_t>(n.axis) >= rank)
                    shape_fail(n, "concat axis " + std::to_string(n.axis) + " out of range for rank " +
                                      std::to_string(rank));
                out = first;
                for (size_t i = 1; i < n.inputs.size(); ++i) {
                    const Shape& s = in(n, i);
                    if (s.size() != rank)
                        shape_fail(n, "rank mismatch between " + shape_str(first) + " and " + shape_str(s));
                    for (size_t d = 0; d < rank; ++d) {
                        if (static_cast<int64_t>(d) == n.axis) continue;
                        if (s[d] != first[d])
                            shape_fail(n, "non-axis dimension mismatch between " + shape_str(first) +
                                              " and " + shape_str(s));
                    }
                    out[static_cast<size_t>(n.axis)] += s[static_cast<size_t>(n.axis)];
                }
                break;
            }
            case OpKind::Slice: {
                const Shape& s = in(n, 0);
                if (n.begin.size() != s.size() || n.end.size() != s.size())
                    shape_fail(n, "slice ranges must cover every dimension of " + shape_str(s));
                out.resize(s.size());
                for (size_t d = 0; d < s.size(); ++d) {
                    if (n.begin[d] < 0 || n.begin[d] >= n.end[d] || n.end[d] > s[d])
                        shape_fail(n, "slice range [" + std::to_string(n.begin[d]) + "," +
                                          std::to_string(n.end[d]) + ") invalid for dimension " +
                                          std::to_string(d) + " of " + shape_str(s));
                    out[d] = n.end[d] - n.begin[d];
                }
                break;
            }
            case OpKind::Sigmoid:
            case OpKind::Tanh:
            case OpKind::Relu:
                out = in(n, 0);
                break;
            case OpKind::AvgPool:
            case OpKind::MaxPool: {
                const Shape& s = in(n, 0);
                int64_t len = s.back();
                if (n.window < 1 || n.window > len)
                    shape_fail(n, "window " + std::to_string(n.window) + " invalid for " + shape_str(s));
                if (n.stride < 1)
                    shape_fail(n, "stride must be >= 1, got " + std::to_string(n.stride));
                out = s;
                out.back() = (len - n.window) / n.stride + 1;
                break;
            }
            case OpKind::Sum:
                out = {1};
                break;
        }
    }
    return shapes;
}

std::map<int64_t, Shape> infer_shapes(const Graph& graph) {
    std::map<int64_t, Shape> out;
    for (const Node& n : graph.nodes()) out[n.id] = graph.shape(n.id);
    return out;
}

Graph make_graph(std::vector<Node> nodes, std::vector<int64_t> outputs) {
    if (nodes.empty()) fail(ErrorKind::Validate, "graph has no nodes");

    for (size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        if (n.id != static_cast<int64_t>(i))
            fail(ErrorKind::Validate, "node ids must be consecutive from 0; found id " +
                                          std::to_string(n.id) + " at position " + std::to_string(i));
        for (int64_t ref : n.inputs)
            if (ref < 0 || ref >= n.id)
                node_fail(n, "input " + std::to_string(ref) + " does not reference an earlier node");

        bool is_leaf = n.kind == OpKind::Input || n.kind == OpKind::Param;
        if (is_leaf && !n.inputs.empty()) node_fail(n, "leaf nodes take no inputs");
        if (!is_leaf && !n.shape.empty()) node_fail(n, "only leaf nodes declare a shape");
        if (n.kind != OpKind::Input && !n.schema.empty()) node_fail(n, "only input nodes carry a schema");
        if (n.kind != OpKind::Param && !n.param_name.empty()) node_fail(n, "only param nodes are named");

        switch (n.kind) {
            case OpKind::Input: {
                check_leaf_shape(n);
                if (n.shape.size() == 2 && n.shape[0] != 1)
                    node_fail(n, "input batch dimension must be 1, got " + shape_str(n.shape));
                if (static_cast<int64_t>(n.schema.size()) != elem_count(n.shape))
                    node_fail(n, "schema lists " + std::to_string(n.schema.size()) +
                                     " features for shape " + shape_str(n.shape));
                break;
            }
            case OpKind::Param:
                if (n.param_name.empty()) node_fail(n, "param requires a name");
                break;
            case OpKind::Matmul:
            case OpKind::Add:
            case OpKind::Mul:
                if (n.inputs.size() != 2) node_fail(n, "expects exactly 2 inputs");
                break;
            case OpKind::Concat:
                if (n.inputs.size() < 2) node_fail(n, "expects at least 2 inputs");
                break;
            case OpKind::Slice:
            case OpKind::Sigmoid:
            case OpKind::Tanh:
            case OpKind::Relu:
            case OpKind::AvgPool:
            case OpKind::MaxPool:
            case OpKind::Sum:
                if (n.inputs.size() != 1) node_fail(n, "expects exactly 1 input");
                break;
        }
    }

    if (outputs.empty()) fail(ErrorKind::Validate, "graph declares no outputs");
    std::set<int64_t> seen_outputs;
    for (int64_t id : outputs) {
        if (id < 0 || static_cast<size_t>(id) >= nodes.size())
            fail(ErrorKind::Validate, "output references unknown node " + std::to_string(id));
        if (!seen_outputs.insert(id).second)
            fail(ErrorKind::Validate, "output " + std::to_string(id) + " listed twice");
    }

    Graph g;
    g.nodes_ = std::move(nodes);
    g.outputs_ = std::move(outputs);
    g.shapes_ = infer_shapes(g.nodes_);

    g.param_bias_.assign(g.nodes_.size(), false);
    g.param_fanin_.assign(g.nodes_.size(), 1);

    for (const Node& n : g.nodes_) {
        if (n.kind == OpKind::Input) {
            g.input_ids_.push_back(n.id);
            for (size_t i = 0; i < n.schema.size(); ++i) {
                const std::string& name = n.schema[i];
                if (name.empty()) node_fail(n, "feature names must be non-empty");
                auto [it, inserted] =
                    g.feature_ids_.emplace(name, static_cast<uint32_t>(g.feature_names_.size()));
                (void)it;
                if (!inserted) node_fail(n, "duplicate feature name \"" + name + "\"");
                g.feature_names_.push_back(name);
                g.feature_pos_.emplace_back(n.id, static_cast<int64_t>(i));
            }
        } else if (n.kind == OpKind::Param) {
            auto [it, inserted] = g.param_nodes_.emplace(n.param_name, n.id);
            (void)it;
            if (!inserted) node_fail(n, "duplicate param name \"" + n.param_name + "\"");
        }
    }

    // Classify params: a param whose every (structurally routed) use is an
    // add operand is a bias; matmul uses set the fan-in. Slice and concat
    // move parameter scalars without ending the routing.
    std::vector<std::set<int64_t>> routed(g.nodes_.size());
    for (const Node& n : g.nodes_) {
        auto& r = routed[static_cast<size_t>(n.id)];
        if (n.kind == OpKind::Param) {
            r.insert(n.id);
        } else if (n.kind == OpKind::Slice || n.kind == OpKind::Concat) {
            for (int64_t src : n.inputs) {
                const auto& sr = routed[static_cast<size_t>(src)];
                r.insert(sr.begin(), sr.end());
            }
        }
    }

    std::vector<bool> used_outside_add(g.nodes_.size(), false);
    for (const Node& n : g.nodes_) {
        if (n.kind == OpKind::Slice || n.kind == OpKind::Concat) continue;  // still routing
        for (int64_t src : n.inputs) {
            for (int64_t pid : routed[static_cast<size_t>(src)]) {
                if (n.kind != OpKind::Add) used_outside_add[static_cast<size_t>(pid)] = true;
                if (n.kind == OpKind::Matmul) {
                    int64_t contracted = g.shapes_[static_cast<size_t>(n.inputs[1])][0];
                    auto& fan = g.param_fanin_[static_cast<size_t>(pid)];
                    fan = std::max(fan, contracted);
                }
            }
        }
    }
    for (const auto& [name, id] : g.param_nodes_) {
        (void)name;
        g.param_bias_[static_cast<size_t>(id)] = !used_outside_add[static_cast<size_t>(id)];
    }

    return g;
}

std::optional<uint32_t> Graph::feature_id(std::string_view name) const {
    auto it = feature_ids_.find(name);
    if (it == feature_ids_.end()) return std::nullopt;
    return it->second;
}

} // namespace graft
