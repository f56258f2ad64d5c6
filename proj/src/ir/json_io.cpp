#include "ir/json_io.hpp"

#include "support/fnv.hpp"
#include "support/jsonutil.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace graft {

namespace {

std::vector<int64_t> int_list(const Json& v, std::string_view ctx) {
    if (!v.is_array()) fail(ErrorKind::Parse, std::string(ctx) + ": expected an array of integers");
    std::vector<int64_t> out;
    out.reserve(v.size());
    for (const Json& e : v) {
        if (!e.is_number_integer())
            fail(ErrorKind::Parse, std::string(ctx) + ": expected an array of integers");
        out.push_back(e.get<int64_t>());
    }
    return out;
}

Node parse_node(const Json& jn, size_t pos) {
    std::string ctx = "node at position " + std::to_string(pos);
    if (!jn.is_object()) fail(ErrorKind::Parse, ctx + ": expected an object");

    Node n;
    n.id = require_int(jn, "id", ctx);
    ctx = "node " + std::to_string(n.id);
    std::string kind = require_string(jn, "kind", ctx);
    auto k = kind_from_name(kind);
    if (!k) fail(ErrorKind::Parse, ctx + ": unknown op kind \"" + kind + "\"");
    n.kind = *k;

    switch (n.kind) {
        case OpKind::Input:
            reject_unknown_keys(jn, {"id", "kind", "shape", "schema"}, ctx);
            n.shape = int_list(require_field(jn, "shape", ctx), ctx + " shape");
            for (const Json& s : require_field(jn, "schema", ctx)) {
                if (!s.is_string()) fail(ErrorKind::Parse, ctx + ": schema entries must be strings");
                n.schema.push_back(s.get<std::string>());
            }
            break;
        case OpKind::Param:
            reject_unknown_keys(jn, {"id", "kind", "name", "shape"}, ctx);
            n.param_name = require_string(jn, "name", ctx);
            n.shape = int_list(require_field(jn, "shape", ctx), ctx + " shape");
            break;
        case OpKind::Concat:
            reject_unknown_keys(jn, {"id", "kind", "inputs", "axis"}, ctx);
            n.inputs = int_list(require_field(jn, "inputs", ctx), ctx + " inputs");
            n.axis = require_int(jn, "axis", ctx);
            break;
        case OpKind::Slice:
            reject_unknown_keys(jn, {"id", "kind", "inputs", "begin", "end"}, ctx);
            n.inputs = int_list(require_field(jn, "inputs", ctx), ctx + " inputs");
            n.begin = int_list(require_field(jn, "begin", ctx), ctx + " begin");
            n.end = int_list(require_field(jn, "end", ctx), ctx + " end");
            break;
        case OpKind::AvgPool:
        case OpKind::MaxPool:
            reject_unknown_keys(jn, {"id", "kind", "inputs", "window", "stride"}, ctx);
            n.inputs = int_list(require_field(jn, "inputs", ctx), ctx + " inputs");
            n.window = require_int(jn, "window", ctx);
            n.stride = require_int(jn, "stride", ctx);
            break;
        default:
            reject_unknown_keys(jn, {"id", "kind", "inputs"}, ctx);
            n.inputs = int_list(require_field(jn, "inputs", ctx), ctx + " inputs");
            break;
    }
    return n;
}

Json node_to_json(const Node& n) {
    Json j;
    j["id"] = n.id;
    j["kind"] = kind_name(n.kind);
    switch (n.kind) {
        case OpKind::Input:
            j["shape"] = n.shape;
            j["schema"] = n.schema;
            break;
        case OpKind::Param:
            j["name"] = n.param_name;
            j["shape"] = n.shape;
            break;
        case OpKind::Concat:
            j["inputs"] = n.inputs;
            j["axis"] = n.axis;
            break;
        case OpKind::Slice:
            j["inputs"] = n.inputs;
            j["begin"] = n.begin;
            j["end"] = n.end;
            break;
        case OpKind::AvgPool:
        case OpKind::MaxPool:
            j["inputs"] = n.inputs;
            j["window"] = n.window;
            j["stride"] = n.stride;
            break;
        default:
            j["inputs"] = n.inputs;
            break;
    }
    return j;
}

} // namespace

Graph parse_graph(std::string_view text) {
    Json j = parse_json(text, "graph file");
    if (!j.is_object()) fail(ErrorKind::Parse, "graph file: expected a JSON object");
    reject_unknown_keys(j, {"nodes", "outputs"}, "graph file");

    const Json& jnodes = require_field(j, "nodes", "graph file");
    if (!jnodes.is_array()) fail(ErrorKind::Parse, "graph file: \"nodes\" must be an array");

    std::vector<Node> nodes;
    nodes.reserve(jnodes.size());
    for (size_t i = 0; i < jnodes.size(); ++i) nodes.push_back(parse_node(jnodes[i], i));

    std::vector<int64_t> outputs = int_list(require_field(j, "outputs", "graph file"), "outputs");
    return make_graph(std::move(nodes), std::move(outputs));
}

std::string serialize_graph(const Graph& graph) {
    Json j;
    Json jnodes = Json::array();
    for (const Node& n : graph.nodes()) jnodes.push_back(node_to_json(n));
    j["nodes"] = std::move(jnodes);
    j["outputs"] = graph.outputs();
    return canonical_dump(j);
}

std::string graph_hash(const Graph& graph) { return fnv1a64_hex(serialize_graph(graph)); }

ParamStore parse_params(std::string_view text) {
    Json j = parse_json(text, "params file");
    if (!j.is_object()) fail(ErrorKind::Parse, "params file: expected a JSON object");
    reject_unknown_keys(j, {"params"}, "params file");
    const Json& jp = require_field(j, "params", "params file");
    if (!jp.is_object()) fail(ErrorKind::Parse, "params file: \"params\" must be an object");

    ParamStore store;
    for (auto it = jp.begin(); it != jp.end(); ++it) {
        std::string ctx = "param \"" + it.key() + "\"";
        const Json& entry = it.value();
        if (!entry.is_object()) fail(ErrorKind::Parse, ctx + ": expected an object");
        reject_unknown_keys(entry, {"shape", "data"}, ctx);
        Tensor t;
        t.shape = int_list(require_field(entry, "shape", ctx), ctx + " shape");
        const Json& data = require_field(entry, "data", ctx);
        if (!data.is_array()) fail(ErrorKind::Parse, ctx + ": \"data\" must be an array");
        t.data.reserve(data.size());
        for (const Json& v : data) {
            if (!v.is_number()) fail(ErrorKind::Parse, ctx + ": data entries must be numbers");
            double d = v.get<double>();
            if (!std::isfinite(d)) fail(ErrorKind::Parse, ctx + ": data entries must be finite");
            t.data.push_back(d);
        }
        if (t.shape.empty() || t.shape.size() > 2)
            fail(ErrorKind::Parse, ctx + ": shape must have rank 1 or 2");
        if (static_cast<int64_t>(t.data.size()) != elem_count(t.shape))
            fail(ErrorKind::Parse, ctx + ": data length " + std::to_string(t.data.size()) +
                                       " does not match shape " + shape_str(t.shape));
        store.tensors.emplace(it.key(), std::move(t));
    }
    return store;
}

std::string serialize_params(const ParamStore& store) {
    Json jp = Json::object();
    for (const auto& [name, t] : store.tensors) {
        Json entry;
        entry["shape"] = t.shape;
        entry["data"] = t.data;
        jp[name] = std::move(entry);
    }
    Json j;
    j["params"] = std::move(jp);
    return canonical_dump(j);
}

void check_params_match(const Graph& graph, const ParamStore& store) {
    for (const auto& [name, id] : graph.params()) {
        auto it = store.tensors.find(name);
        if (it == store.tensors.end())
            fail(ErrorKind::Validate, "param store is missing tensor \"" + name + "\"");
        if (it->second.shape != graph.node(id).shape)
            fail(ErrorKind::Validate, "tensor \"" + name + "\" has shape " +
                                          shape_str(it->second.shape) + ", graph declares " +
                                          shape_str(graph.node(id).shape));
    }
    for (const auto& [name, t] : store.tensors) {
        (void)t;
        if (!graph.params().contains(name))
            fail(ErrorKind::Validate, "param store has extra tensor \"" + name + "\"");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (!in.good() && !in.eof()) fail(ErrorKind::Io, "error reading " + path);
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.good()) fail(ErrorKind::Io, "error writing " + path);
}

} // namespace graft
