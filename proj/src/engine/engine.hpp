#pragma once

#include "ir/types.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace graft {

enum class InitMode { Positive, Signed };

// Positive mode: non-bias weights uniform on [0.1, 1.0] scaled by 1/fan-in,
// bias tensors exactly zero. Signed mode: uniform on [-1, 1]/fan-in for all
// params. Deterministic for a given seed.
ParamStore init_params(const Graph& graph, InitMode mode, uint64_t seed);

using InputMap = std::map<int64_t, Tensor>;
using GradStore = std::map<std::string, Tensor>;

// Per-node value buffers retained from a forward pass, reused by backward.
struct Tape {
    std::vector<std::vector<double>> values;
};

struct ForwardResult {
    std::vector<Tensor> outputs;  // one per graph output, in declaration order
    Tape tape;
};

ForwardResult forward(const Graph& graph, const ParamStore& params, const InputMap& inputs);

// Exact reverse-mode gradients of C = sum of every output element with
// respect to each parameter element. Non-finite values raise Numeric errors.
GradStore backward(const Graph& graph, const ParamStore& params, const InputMap& inputs);
GradStore backward(const Graph& graph, const Tape& tape);

// Full-universe input map: every input node zeroed, then a single 1.0 at
// the position of global feature `fid`.
InputMap one_hot_inputs(const Graph& graph, uint32_t fid);

struct Substitution {
    int64_t node;
    OpKind from;
    OpKind to;
};

struct SafeTransform {
    Graph graph;
    std::vector<Substitution> substitutions;
};

// Replaces every maxpool with avgpool and every sigmoid with tanh, the
// zero-preserving configuration required for gradient probing.
SafeTransform mapping_safe_transform(const Graph& graph);

} // namespace graft
