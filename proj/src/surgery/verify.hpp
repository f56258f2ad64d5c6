#pragma once

#include "ir/types.hpp"
#include "surgery/diff.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace graft {

struct VerifyReport {
    int64_t states = 0;
    double max_abs_diff = 0.0;
    std::vector<double> per_state;
    std::optional<double> transfer_pct;  // filled by the surgery pipeline
};

// Samples random world states and compares both models' outputs. Kept
// features get the same uniform [-1,1] draw on both sides, inserted
// features are drawn into the new model only, removed features are forced
// to 0 in the old model (equality for arbitrary removed values is not a
// claim this check makes).
VerifyReport verify_equivalence(const Graph& old_graph, const ParamStore& old_params,
                                const Graph& new_graph, const ParamStore& new_params,
                                int64_t n_states, uint64_t seed,
                                const RenameTable& renames = {});

/// Report file: {"max_abs_diff":…,"states":100,"transfer_pct":…}
std::string serialize_verify_report(const VerifyReport& report);

} // namespace graft
