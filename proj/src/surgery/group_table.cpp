#include "surgery/group_table.hpp"

#include <algorithm>

namespace graft {

std::string group_key_str(const GroupKey& key) {
    std::string out = "{";
    for (size_t i = 0; i < key.size(); ++i) {
        if (i) out += ",";
        out += key[i];
    }
    return out + "}";
}

GroupTable build_group_table(const ParamAnnotations& annotations) {
    GroupTable table;
    for (const auto& [param, sets] : annotations.params) {
        std::map<GroupKey, std::vector<int64_t>> by_key;
        for (size_t e = 0; e < sets.size(); ++e) {
            GroupKey key;
            sets[e].for_each([&](uint32_t fid) { key.push_back(annotations.feature_names[fid]); });
            std::sort(key.begin(), key.end());
            by_key[std::move(key)].push_back(static_cast<int64_t>(e));
        }
        for (auto& [key, elems] : by_key)
            table.groups[key].push_back(ParamBlock{param, std::move(elems)});
    }
    return table;
}

} // namespace graft
