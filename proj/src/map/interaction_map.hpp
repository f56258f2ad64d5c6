#pragma once

#include "ir/types.hpp"
#include "map/feature_set.hpp"

#include <map>
#include <string>
#include <vector>

namespace graft {

// Feature -> set of parameter coordinates (tensor name + flat element index).
// Kept at element granularity in memory; coalesced to half-open runs only
// when serialized.
struct InteractionMap {
    // every universe feature is present as a key, possibly with no coords
    std::map<std::string, std::map<std::string, std::vector<int64_t>>> features;

    uint64_t total_interactions() const;
    void add(const std::string& feature, const std::string& param, int64_t index);
    void normalize();  // sort + dedupe coordinate lists

    bool operator==(const InteractionMap&) const = default;
};

// Inverse view: one feature set per parameter element.
struct ParamAnnotations {
    std::vector<std::string> feature_names;  // global id -> name
    std::map<std::string, std::vector<FeatureSet>> params;

    InteractionMap to_interaction_map() const;
};

ParamAnnotations annotations_from_map(const Graph& graph, const InteractionMap& map);

// Runs are half-open [start,end) flat-index intervals.
std::vector<std::pair<int64_t, int64_t>> coalesce_runs(const std::vector<int64_t>& sorted_indices);
std::vector<int64_t> expand_runs(const std::vector<std::pair<int64_t, int64_t>>& runs);

/// InteractionMap file format:
/// {"features":{"hp":[{"param":"W","runs":[[0,2]]},{"param":"b","runs":[[0,2]]}]}}
InteractionMap parse_interaction_map(std::string_view text);
std::string serialize_interaction_map(const InteractionMap& map);

struct MapDifference {
    std::string feature;
    std::map<std::string, std::vector<int64_t>> only_a;
    std::map<std::string, std::vector<int64_t>> only_b;
};

struct EqualityReport {
    bool equal = false;
    std::vector<std::string> universe_only_a;
    std::vector<std::string> universe_only_b;
    std::vector<MapDifference> differences;
};

// Structural equality with a per-feature symmetric difference on mismatch.
// Disjoint universes are reported, not errored.
EqualityReport maps_equal(const InteractionMap& a, const InteractionMap& b);
std::string serialize_equality_report(const EqualityReport& report);

} // namespace graft
