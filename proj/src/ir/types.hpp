#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace graft {

// Shapes are rank 1 ([n]) or rank 2 ([r,c]); activations carry a batch
// dimension fixed at 1, so every activation is [n] or [1,n].
using Shape = std::vector<int64_t>;

int64_t elem_count(const Shape& s);
std::string shape_str(const Shape& s);

enum class OpKind {
    Input,
    Param,
    Matmul,
    Add,
    Mul,
    Concat,
    Slice,
    Sigmoid,
    Tanh,
    Relu,
    AvgPool,
    MaxPool,
    Sum,
};

const char* kind_name(OpKind k);
std::optional<OpKind> kind_from_name(std::string_view name);

struct Node {
    int64_t id = 0;
    OpKind kind = OpKind::Input;
    std::vector<int64_t> inputs;

    Shape shape;                      // declared shape, input/param only
    std::string param_name;           // param only
    std::vector<std::string> schema;  // input only: feature names in index order

    int64_t axis = 0;                 // concat
    std::vector<int64_t> begin;       // slice, per-dimension half-open range
    std::vector<int64_t> end;
    int64_t window = 0;               // pools, 1-D along the last axis
    int64_t stride = 0;

    bool operator==(const Node&) const = default;
};

struct Tensor {
    Shape shape;
    std::vector<double> data;  // row-major

    bool operator==(const Tensor&) const = default;
};

// Named dense float64 tensors holding the model parameters.
struct ParamStore {
    std::map<std::string, Tensor> tensors;

    bool operator==(const ParamStore&) const = default;
};

// Immutable, validated computational graph. Construction via make_graph
// checks every structural invariant and caches inferred shapes plus the
// global feature universe (schemas concatenated in input-node-id order).
class Graph {
public:
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<int64_t>& outputs() const { return outputs_; }
    const Node& node(int64_t id) const { return nodes_[static_cast<size_t>(id)]; }
    size_t size() const { return nodes_.size(); }

    const Shape& shape(int64_t id) const { return shapes_[static_cast<size_t>(id)]; }
    const std::vector<Shape>& shapes() const { return shapes_; }

    // global feature universe
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    uint32_t feature_count() const { return static_cast<uint32_t>(feature_names_.size()); }
    std::optional<uint32_t> feature_id(std::string_view name) const;
    // input node and element offset of a global feature
    std::pair<int64_t, int64_t> feature_position(uint32_t fid) const { return feature_pos_[fid]; }

    const std::map<std::string, int64_t>& params() const { return param_nodes_; }
    const std::vector<int64_t>& input_ids() const { return input_ids_; }

    // a param is additive ("bias") when every use is an add operand
    bool param_is_bias(int64_t node_id) const { return param_bias_[static_cast<size_t>(node_id)]; }
    // contracted dimension of the widest matmul use; 1 for element-wise params
    int64_t param_fan_in(int64_t node_id) const { return param_fanin_[static_cast<size_t>(node_id)]; }

    bool operator==(const Graph& o) const { return nodes_ == o.nodes_ && outputs_ == o.outputs_; }

    friend Graph make_graph(std::vector<Node> nodes, std::vector<int64_t> outputs);

private:
    Graph() = default;

    std::vector<Node> nodes_;
    std::vector<int64_t> outputs_;
    std::vector<Shape> shapes_;
    std::vector<std::string> feature_names_;
    std::map<std::string, uint32_t, std::less<>> feature_ids_;
    std::vector<std::pair<int64_t, int64_t>> feature_pos_;
    std::map<std::string, int64_t> param_nodes_;
    std::vector<int64_t> input_ids_;
    std::vector<bool> param_bias_;
    std::vector<int64_t> param_fanin_;
};

// Validates and freezes a graph; throws Error on any invariant violation.
Graph make_graph(std::vector<Node> nodes, std::vector<int64_t> outputs);

// Deterministic shape inference over a topologically ordered node list.
// Throws Error{Shape} naming the offending node on any mismatch.
std::vector<Shape> infer_shapes(const std::vector<Node>& nodes);
std::map<int64_t, Shape> infer_shapes(const Graph& graph);

} // namespace graft
