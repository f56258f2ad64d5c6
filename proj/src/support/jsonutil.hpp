#pragma once

#include "support/error.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace graft {

using Json = nlohmann::json;

// Parses text, converting nlohmann diagnostics into ErrorKind::Parse.
Json parse_json(std::string_view text, std::string_view what);

// Canonical encoding: object keys sorted (nlohmann's std::map backing),
// compact separators, shortest round-trip decimals for doubles.
inline std::string canonical_dump(const Json& j) { return j.dump(); }

// Field accessors that fail with a Parse error naming the field.
const Json& require_field(const Json& obj, const char* key, std::string_view ctx);
int64_t require_int(const Json& obj, const char* key, std::string_view ctx);
std::string require_string(const Json& obj, const char* key, std::string_view ctx);

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         std::string_view ctx);

} // namespace graft
