#include "surgery/verify.hpp"

#include "engine/engine.hpp"
#include "support/jsonutil.hpp"
#include "support/parallel.hpp"
#include "support/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace graft {

namespace {

InputMap zero_inputs(const Graph& g) {
    InputMap m;
    for (int64_t id : g.input_ids()) {
        Tensor t;
        t.shape = g.node(id).shape;
        t.data.assign(static_cast<size_t>(elem_count(t.shape)), 0.0);
        m.emplace(id, std::move(t));
    }
    return m;
}

} // namespace

VerifyReport verify_equivalence(const Graph& old_graph, const ParamStore& old_params,
                                const Graph& new_graph, const ParamStore& new_params,
                                int64_t n_states, uint64_t seed, const RenameTable& renames) {
    if (n_states < 1) fail(ErrorKind::InvalidArg, "state count must be >= 1");

    // feature correspondence by (renamed) name
    std::map<std::string, uint32_t> old_by_name;
    for (uint32_t f = 0; f < old_graph.feature_count(); ++f) {
        std::string name = old_graph.feature_names()[f];
        auto it = renames.find(name);
        if (it != renames.end()) name = it->second;
        if (!old_by_name.emplace(name, f).second)
            fail(ErrorKind::Validate, "schema correspondence maps two old features onto \"" + name + "\"");
    }
    for (const auto& [from, to] : renames) {
        (void)to;
        if (!old_graph.feature_id(from))
            fail(ErrorKind::Validate, "rename source \"" + from + "\" is not an old-model feature");
    }

    // drawing order: all names that receive a value, sorted
    std::set<std::string> draw_names;
    for (const auto& [name, fid] : old_by_name)
        if (new_graph.feature_id(name)) draw_names.insert(name);  // kept
    for (const std::string& name : new_graph.feature_names()) draw_names.insert(name);

    if (old_graph.outputs().size() != new_graph.outputs().size())
        fail(ErrorKind::Validate, "models disagree on output count");
    for (size_t i = 0; i < old_graph.outputs().size(); ++i)
        if (old_graph.shape(old_graph.outputs()[i]) != new_graph.shape(new_graph.outputs()[i]))
            fail(ErrorKind::Validate, "models disagree on the shape of output " + std::to_string(i));

    VerifyReport rep;
    rep.states = n_states;
    rep.per_state.assign(static_cast<size_t>(n_states), 0.0);

    parallel_for(static_cast<size_t>(n_states), [&](size_t state) {
        Rng rng(mix_seed(seed, state));
        InputMap old_in = zero_inputs(old_graph);
        InputMap new_in = zero_inputs(new_graph);
        for (const std::string& name : draw_names) {
            double v = rng.uniform(-1.0, 1.0);
            if (auto nf = new_graph.feature_id(name)) {
                auto [node, off] = new_graph.feature_position(*nf);
                new_in[node].data[static_cast<size_t>(off)] = v;
            }
            auto oit = old_by_name.find(name);
            if (oit != old_by_name.end() && new_graph.feature_id(name)) {
                auto [node, off] = old_graph.feature_position(oit->second);
                old_in[node].data[static_cast<size_t>(off)] = v;
            }
            // removed features stay 0 in the old model
        }

        ForwardResult old_out = forward(old_graph, old_params, old_in);
        ForwardResult new_out = forward(new_graph, new_params, new_in);
        double d = 0.0;
        for (size_t i = 0; i < old_out.outputs.size(); ++i)
            for (size_t e = 0; e < old_out.outputs[i].data.size(); ++e)
                d = std::max(d, std::fabs(old_out.outputs[i].data[e] - new_out.outputs[i].data[e]));
        rep.per_state[state] = d;
    });

    rep.max_abs_diff = *std::max_element(rep.per_state.begin(), rep.per_state.end());
    return rep;
}

std::string serialize_verify_report(const VerifyReport& rep) {
    Json j;
    j["states"] = rep.states;
    j["max_abs_diff"] = rep.max_abs_diff;
    if (rep.transfer_pct) j["transfer_pct"] = *rep.transfer_pct;
    return canonical_dump(j);
}

} // namespace graft
