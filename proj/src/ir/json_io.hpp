#pragma once

#include "ir/types.hpp"

#include <string>
#include <string_view>

namespace graft {

/// Graph file format:
/// {"nodes":[{"id":0,"kind":"input","shape":[1,2],"schema":["hp","mana"]},
///           {"id":1,"kind":"param","name":"W","shape":[2,2]},
///           {"id":2,"kind":"matmul","inputs":[0,1]},...],"outputs":[5]}
/// Op attributes: concat "axis"; slice "begin"/"end"; pools "window"/"stride".
Graph parse_graph(std::string_view text);
std::string serialize_graph(const Graph& graph);

// FNV-1a over the canonical serialization, as a 16-digit hex string
std::string graph_hash(const Graph& graph);

/// Params file format:
/// {"params":{"W":{"shape":[2,2],"data":[0.1,0.2,0.3,0.4]}}} — row-major float64.
ParamStore parse_params(std::string_view text);
std::string serialize_params(const ParamStore& store);

// store must provide exactly the graph's params with matching shapes
void check_params_match(const Graph& graph, const ParamStore& store);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace graft
