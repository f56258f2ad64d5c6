#pragma once

#include "ir/types.hpp"
#include "map/interaction_map.hpp"

#include <map>
#include <string>
#include <vector>

namespace graft {

// Canonical group key: the sorted feature names a parameter element
// interacts with. Elements that interact with nothing share the empty key.
using GroupKey = std::vector<std::string>;

std::string group_key_str(const GroupKey& key);

struct ParamBlock {
    std::string param;
    std::vector<int64_t> elems;  // sorted flat indices

    bool operator==(const ParamBlock&) const = default;
};

// Lookup keyed by feature group -> parameter blocks annotated with exactly
// that group. Keys use names, so the table is schema-index-independent.
struct GroupTable {
    std::map<GroupKey, std::vector<ParamBlock>> groups;
};

GroupTable build_group_table(const ParamAnnotations& annotations);

} // namespace graft
