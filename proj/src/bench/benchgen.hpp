#pragma once

#include "ir/types.hpp"

#include <cstdint>

namespace graft {

// Deterministic benchmark model: one input of `features` named features
// feeding `depth` fully connected tanh layers of the same width. Used to
// compare single-pass boolean mapping against per-feature gradient probing.
Graph make_bench_graph(int64_t features, int64_t depth);

} // namespace graft
