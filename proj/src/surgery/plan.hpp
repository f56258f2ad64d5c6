#pragma once

#include "surgery/diff.hpp"

#include <cstdint>
#include <optional>

namespace graft {

enum class PlanInitMode { Zero, PositiveRandom };

struct PlanStep {
    enum class Op { Copy, Init } op = Op::Copy;
    std::string src;  // copy only
    std::vector<std::pair<int64_t, int64_t>> src_runs;
    std::string dst;
    std::vector<std::pair<int64_t, int64_t>> dst_runs;
    PlanInitMode mode = PlanInitMode::Zero;  // init only

    bool operator==(const PlanStep&) const = default;
};

// Ordered copy/init directives realizing the parameter transfer. The dst
// runs of all steps are disjoint and tile every new-model parameter element;
// copy src/dst run lists pair up with equal lengths run by run.
struct SurgeryPlan {
    std::string old_hash;
    std::string new_hash;
    std::vector<PlanStep> steps;

    bool operator==(const SurgeryPlan&) const = default;
};

// Matched blocks become copies (with offset remapping), fresh blocks become
// init directives, retired blocks are dropped. Zero init keeps the new
// model's outputs bit-compatible with the old one; positive_random is for
// training warm-starts.
SurgeryPlan make_plan(const MapDiff& diff, PlanInitMode fresh_mode);

struct ApplyResult {
    ParamStore params;
    double transfer_pct = 0.0;  // copied elements / total new elements
    int64_t copied_elems = 0;
    int64_t total_elems = 0;
};

// Refuses (before any write) plans whose new-graph hash does not match or
// whose directives do not exactly tile the new parameters. The seed feeds
// positive_random init directives only.
ApplyResult apply_plan(const SurgeryPlan& plan, const ParamStore& old_params,
                       const Graph& new_graph, uint64_t seed);

/// Plan file format:
/// {"old_hash":"…","new_hash":"…","steps":[
///   {"op":"copy","src":"W","src_runs":[[0,2]],"dst":"W","dst_runs":[[0,2]]},
///   {"op":"init","dst":"W","dst_runs":[[2,4]],"mode":"zero"}]}
SurgeryPlan parse_plan(std::string_view text);
std::string serialize_plan(const SurgeryPlan& plan);

} // namespace graft
