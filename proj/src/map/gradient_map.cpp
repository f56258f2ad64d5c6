#include "map/mappers.hpp"

#include "support/error.hpp"
#include "support/parallel.hpp"

#include <cmath>
#include <optional>

namespace graft {

namespace {

// one add site where a parameter scalar meets an activation element
struct AdditiveSite {
    size_t param_elem;
    int64_t other_node;
    size_t other_elem;
};

// per param name, every add interaction site of its elements
std::map<std::string, std::vector<AdditiveSite>> additive_sites(const Graph& graph) {
    auto prov = param_provenance(graph);
    std::map<std::string, std::vector<AdditiveSite>> sites;
    for (const Node& n : graph.nodes()) {
        if (n.kind != OpKind::Add) continue;
        const Shape& sa = graph.shape(n.inputs[0]);
        const Shape& sb = graph.shape(n.inputs[1]);
        const Shape& so = graph.shape(n.id);
        int64_t rows = so.size() == 2 ? so[0] : 1;
        int64_t cols = so.back();
        bool a_row = sa.size() == 1 && so.size() == 2;
        bool b_row = sb.size() == 1 && so.size() == 2;
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < cols; ++c) {
                size_t ai = static_cast<size_t>(a_row ? c : r * cols + c);
                size_t bi = static_cast<size_t>(b_row ? c : r * cols + c);
                const ParamRef& pa = prov[static_cast<size_t>(n.inputs[0])][ai];
                const ParamRef& pb = prov[static_cast<size_t>(n.inputs[1])][bi];
                if (pa.is_param())
                    sites[graph.node(pa.node).param_name].push_back(
                        {static_cast<size_t>(pa.elem), n.inputs[1], bi});
                if (pb.is_param())
                    sites[graph.node(pb.node).param_name].push_back(
                        {static_cast<size_t>(pb.elem), n.inputs[0], ai});
            }
    }
    return sites;
}

} // namespace

InteractionMap gradient_map(const Graph& graph, const GradientMapOptions& opts) {
    const Graph* g = &graph;
    std::optional<SafeTransform> transformed;
    if (opts.safe_transform) {
        transformed.emplace(mapping_safe_transform(graph));
        g = &transformed->graph;
    }

    ParamStore owned;
    const ParamStore* params = opts.params;
    if (!params) {
        owned = init_params(*g, opts.init, opts.seed);
        params = &owned;
    }

    auto sites = additive_sites(*g);
    uint32_t n_features = g->feature_count();

    // probe results are collected per feature and merged in feature order,
    // so the outcome is identical however probes are scheduled
    std::vector<std::map<std::string, std::vector<int64_t>>> probe_hits(n_features);

    parallel_for(n_features, [&](size_t t) {
        uint32_t fid = static_cast<uint32_t>(t);
        ForwardResult fwd;
        GradStore grads;
        try {
            fwd = forward(*g, *params, one_hot_inputs(*g, fid));
            grads = backward(*g, fwd.tape);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Numeric)
                fail(ErrorKind::Numeric, "probe of feature \"" + g->feature_names()[fid] +
                                             "\" produced a non-finite value: " + e.what());
            throw;
        }

        auto& hits = probe_hits[t];
        for (const auto& [name, id] : g->params()) {
            if (g->param_is_bias(id)) {
                // additive parameters leave a gradient even through dead
                // branches; the incoming activation decides instead
                auto it = sites.find(name);
                if (it == sites.end()) continue;
                std::vector<int64_t> recorded;
                for (const AdditiveSite& s : it->second) {
                    double x = fwd.tape.values[static_cast<size_t>(s.other_node)][s.other_elem];
                    if (std::fabs(x) > kInteractionThreshold)
                        recorded.push_back(static_cast<int64_t>(s.param_elem));
                }
                if (!recorded.empty()) hits[name] = std::move(recorded);
            } else {
                const Tensor& grad = grads.at(name);
                std::vector<int64_t> recorded;
                for (size_t e = 0; e < grad.data.size(); ++e)
                    if (std::fabs(grad.data[e]) > kInteractionThreshold)
                        recorded.push_back(static_cast<int64_t>(e));
                if (!recorded.empty()) hits[name] = std::move(recorded);
            }
        }
    });

    InteractionMap map;
    for (const std::string& name : g->feature_names()) map.features[name];
    for (uint32_t t = 0; t < n_features; ++t) {
        auto& dst = map.features[g->feature_names()[t]];
        for (auto& [param, coords] : probe_hits[t]) {
            auto& v = dst[param];
            v.insert(v.end(), coords.begin(), coords.end());
        }
    }
    map.normalize();
    return map;
}

InteractionMap gradient_map(const Graph& graph, uint64_t seed) {
    GradientMapOptions opts;
    opts.seed = seed;
    return gradient_map(graph, opts);
}

} // namespace graft
