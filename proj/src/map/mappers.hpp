#pragma once

#include "engine/engine.hpp"
#include "ir/types.hpp"
#include "map/interaction_map.hpp"

#include <cstdint>

namespace graft {

// |g| (or |x| for additive params) above this counts as an interaction;
// guards against float64 underflow, not a tuning knob.
inline constexpr double kInteractionThreshold = 1e-9;

// Scalar provenance: which parameter element a value element is, if it is
// one at all. Structural ops (slice, concat) move scalars without creating
// new ones; every arithmetic op clears provenance.
struct ParamRef {
    int64_t node = -1;  // param node id, -1 when not a parameter scalar
    int64_t elem = 0;

    bool is_param() const { return node >= 0; }
};

std::vector<std::vector<ParamRef>> param_provenance(const Graph& graph);

struct BooleanMapResult {
    ParamAnnotations annotations;
    InteractionMap map;
    // per node, per element: features flowing into that scalar
    std::vector<std::vector<FeatureSet>> node_sets;
};

// Single abstract pass over the graph with per-scalar feature bitsets.
// Never reads parameter values, so the result is initialization-agnostic.
BooleanMapResult boolean_map(const Graph& graph);

struct GradientMapOptions {
    InitMode init = InitMode::Positive;
    bool safe_transform = true;  // maxpool->avgpool, sigmoid->tanh
    uint64_t seed = 0;
    const ParamStore* params = nullptr;  // overrides init when set
};

// One forward+backward probe per global feature with a one-hot input.
// The default configuration (positive init, safe transform) provably finds
// the same interactions the boolean pass does; the options exist to
// reproduce the masking behaviour of unsafe configurations.
InteractionMap gradient_map(const Graph& graph, uint64_t seed);
InteractionMap gradient_map(const Graph& graph, const GradientMapOptions& opts);

inline constexpr uint64_t kOracleEdgeBudget = 1'000'000;

// Brute-force ground truth: expands the graph to scalar granularity and
// propagates plain label sets over an explicit edge list with a worklist.
// Shares no code with the bitset engine. Refuses graphs whose expansion
// exceeds kOracleEdgeBudget edges.
InteractionMap oracle_map(const Graph& graph);

} // namespace graft
