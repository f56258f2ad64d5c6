#pragma once

#include "surgery/group_table.hpp"

#include <map>
#include <string>
#include <vector>

namespace graft {

struct BlockMatch {
    GroupKey key;  // new-side group key
    std::string param;
    std::vector<int64_t> src_elems;
    std::vector<int64_t> dst_elems;

    bool moved() const { return src_elems != dst_elems; }
};

struct UnmatchedBlock {
    GroupKey key;
    std::string param;
    std::vector<int64_t> elems;
};

// Difference between two interaction maps, block-matched via kept-name
// group-key projection. Every new-model parameter element lands in exactly
// one matched or fresh block.
struct MapDiff {
    std::string old_hash;
    std::string new_hash;
    std::vector<std::string> kept;
    std::vector<std::string> inserted;
    std::vector<std::string> removed;
    std::vector<BlockMatch> matched;
    std::vector<UnmatchedBlock> retired;  // old blocks with no counterpart
    std::vector<UnmatchedBlock> fresh;    // new blocks with no counterpart
    std::map<std::string, int64_t> new_param_sizes;
};

using RenameTable = std::map<std::string, std::string>;  // old name -> new name

// Groups match when their kept-name key projections are identical, the
// param name agrees and the element counts agree. Two candidates that tie
// on all three raise an Ambiguous error; there is no silent tie-break.
MapDiff diff_maps(const Graph& old_graph, const ParamAnnotations& old_ann,
                  const Graph& new_graph, const ParamAnnotations& new_ann,
                  const RenameTable& renames = {});

MapDiff parse_diff(std::string_view text);
std::string serialize_diff(const MapDiff& diff);

RenameTable parse_renames(std::string_view text);

} // namespace graft
