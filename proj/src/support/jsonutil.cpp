#include "support/jsonutil.hpp"

#include <algorithm>

namespace graft {

Json parse_json(std::string_view text, std::string_view what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::Parse, std::string(what) + ": " + e.what());
    }
}

const Json& require_field(const Json& obj, const char* key, std::string_view ctx) {
    auto it = obj.find(key);
    if (it == obj.end())
        fail(ErrorKind::Parse, std::string(ctx) + ": missing field \"" + key + "\"");
    return *it;
}

int64_t require_int(const Json& obj, const char* key, std::string_view ctx) {
    const Json& v = require_field(obj, key, ctx);
    if (!v.is_number_integer())
        fail(ErrorKind::Parse, std::string(ctx) + ": field \"" + key + "\" must be an integer");
    return v.get<int64_t>();
}

std::string require_string(const Json& obj, const char* key, std::string_view ctx) {
    const Json& v = require_field(obj, key, ctx);
    if (!v.is_string())
        fail(ErrorKind::Parse, std::string(ctx) + ": field \"" + key + "\" must be a string");
    return v.get<std::string>();
}

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         std::string_view ctx) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& k = it.key();
        bool known = std::any_of(allowed.begin(), allowed.end(),
                                 [&](const char* a) { return k == a; });
        if (!known)
            fail(ErrorKind::Parse, std::string(ctx) + ": unknown field \"" + k + "\"");
    }
}

} // namespace graft
