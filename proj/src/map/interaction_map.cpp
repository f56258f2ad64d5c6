#include "map/interaction_map.hpp"

#include "support/jsonutil.hpp"

#include <algorithm>

namespace graft {

uint64_t InteractionMap::total_interactions() const {
    uint64_t n = 0;
    for (const auto& [f, params] : features) {
        (void)f;
        for (const auto& [p, coords] : params) {
            (void)p;
            n += coords.size();
        }
    }
    return n;
}

void InteractionMap::add(const std::string& feature, const std::string& param, int64_t index) {
    features[feature][param].push_back(index);
}

void InteractionMap::normalize() {
    for (auto& [f, params] : features) {
        (void)f;
        for (auto it = params.begin(); it != params.end();) {
            auto& coords = it->second;
            if (!std::is_sorted(coords.begin(), coords.end()))
                std::sort(coords.begin(), coords.end());
            coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
            it = coords.empty() ? params.erase(it) : std::next(it);
        }
    }
}

InteractionMap ParamAnnotations::to_interaction_map() const {
    InteractionMap map;
    for (const std::string& name : feature_names) map.features[name];
    for (const auto& [param, sets] : params) {
        // resolve the per-feature coordinate list once, then stream indices
        std::vector<std::vector<int64_t>*> slots(feature_names.size(), nullptr);
        for (size_t idx = 0; idx < sets.size(); ++idx) {
            sets[idx].for_each([&](uint32_t fid) {
                if (!slots[fid]) slots[fid] = &map.features[feature_names[fid]][param];
                slots[fid]->push_back(static_cast<int64_t>(idx));
            });
        }
    }
    map.normalize();
    return map;
}

ParamAnnotations annotations_from_map(const Graph& graph, const InteractionMap& map) {
    ParamAnnotations ann;
    ann.feature_names = graph.feature_names();
    uint32_t width = graph.feature_count();
    for (const auto& [name, id] : graph.params())
        ann.params[name].assign(static_cast<size_t>(elem_count(graph.node(id).shape)),
                                FeatureSet(width));

    for (const auto& [feature, params] : map.features) {
        auto fid = graph.feature_id(feature);
        if (!fid)
            fail(ErrorKind::Validate, "map mentions feature \"" + feature + "\" unknown to the graph");
        for (const auto& [param, coords] : params) {
            auto it = ann.params.find(param);
            if (it == ann.params.end())
                fail(ErrorKind::Validate, "map mentions param \"" + param + "\" unknown to the graph");
            for (int64_t idx : coords) {
                if (idx < 0 || static_cast<size_t>(idx) >= it->second.size())
                    fail(ErrorKind::Validate, "map coordinate " + std::to_string(idx) +
                                                  " out of range for param \"" + param + "\"");
                it->second[static_cast<size_t>(idx)].set(*fid);
            }
        }
    }
    return ann;
}

std::vector<std::pair<int64_t, int64_t>> coalesce_runs(const std::vector<int64_t>& sorted) {
    std::vector<std::pair<int64_t, int64_t>> runs;
    for (int64_t idx : sorted) {
        if (!runs.empty() && runs.back().second == idx)
            ++runs.back().second;
        else
            runs.emplace_back(idx, idx + 1);
    }
    return runs;
}

std::vector<int64_t> expand_runs(const std::vector<std::pair<int64_t, int64_t>>& runs) {
    std::vector<int64_t> out;
    for (auto [s, e] : runs)
        for (int64_t i = s; i < e; ++i) out.push_back(i);
    return out;
}

namespace {

Json runs_to_json(const std::vector<int64_t>& sorted) {
    Json out = Json::array();
    for (auto [s, e] : coalesce_runs(sorted)) out.push_back(Json::array({s, e}));
    return out;
}

std::vector<int64_t> runs_from_json(const Json& jruns, const std::string& ctx) {
    if (!jruns.is_array()) fail(ErrorKind::Parse, ctx + ": \"runs\" must be an array");
    std::vector<std::pair<int64_t, int64_t>> runs;
    int64_t prev_end = -1;
    for (const Json& jr : jruns) {
        if (!jr.is_array() || jr.size() != 2 || !jr[0].is_number_integer() || !jr[1].is_number_integer())
            fail(ErrorKind::Parse, ctx + ": runs must be [start,end) integer pairs");
        int64_t s = jr[0].get<int64_t>(), e = jr[1].get<int64_t>();
        if (s < 0 || e <= s) fail(ErrorKind::Parse, ctx + ": invalid run [" + std::to_string(s) + "," +
                                                        std::to_string(e) + ")");
        if (s < prev_end)
            fail(ErrorKind::Parse, ctx + ": runs must be sorted and non-overlapping");
        prev_end = e;
        runs.emplace_back(s, e);
    }
    return expand_runs(runs);
}

} // namespace

InteractionMap parse_interaction_map(std::string_view text) {
    Json j = parse_json(text, "interaction map file");
    if (!j.is_object()) fail(ErrorKind::Parse, "interaction map file: expected a JSON object");
    reject_unknown_keys(j, {"features"}, "interaction map file");
    const Json& jf = require_field(j, "features", "interaction map file");
    if (!jf.is_object()) fail(ErrorKind::Parse, "interaction map file: \"features\" must be an object");

    InteractionMap map;
    for (auto it = jf.begin(); it != jf.end(); ++it) {
        std::string ctx = "feature \"" + it.key() + "\"";
        auto& per_param = map.features[it.key()];
        if (!it.value().is_array()) fail(ErrorKind::Parse, ctx + ": expected an array of blocks");
        for (const Json& jb : it.value()) {
            if (!jb.is_object()) fail(ErrorKind::Parse, ctx + ": blocks must be objects");
            reject_unknown_keys(jb, {"param", "runs"}, ctx);
            std::string param = require_string(jb, "param", ctx);
            if (per_param.contains(param))
                fail(ErrorKind::Parse, ctx + ": param \"" + param + "\" listed twice");
            per_param[param] = runs_from_json(require_field(jb, "runs", ctx), ctx);
        }
    }
    return map;
}

std::string serialize_interaction_map(const InteractionMap& map) {
    Json jf = Json::object();
    for (const auto& [feature, params] : map.features) {
        Json blocks = Json::array();
        for (const auto& [param, coords] : params) {
            if (coords.empty()) continue;
            Json jb;
            jb["param"] = param;
            jb["runs"] = runs_to_json(coords);
            blocks.push_back(std::move(jb));
        }
        jf[feature] = std::move(blocks);
    }
    Json j;
    j["features"] = std::move(jf);
    return canonical_dump(j);
}

EqualityReport maps_equal(const InteractionMap& a, const InteractionMap& b) {
    EqualityReport rep;
    rep.equal = true;

    for (const auto& [f, v] : a.features) {
        (void)v;
        if (!b.features.contains(f)) {
            rep.universe_only_a.push_back(f);
            rep.equal = false;
        }
    }
    for (const auto& [f, v] : b.features) {
        (void)v;
        if (!a.features.contains(f)) {
            rep.universe_only_b.push_back(f);
            rep.equal = false;
        }
    }

    for (const auto& [f, pa] : a.features) {
        auto itb = b.features.find(f);
        if (itb == b.features.end()) continue;
        const auto& pb = itb->second;
        MapDifference d;
        d.feature = f;
        auto params = pa;  // union of param keys
        for (const auto& [p, c] : pb) params.try_emplace(p);
        for (auto& [p, unused] : params) {
            (void)unused;
            static const std::vector<int64_t> kEmpty;
            auto ita = pa.find(p);
            auto itpb = pb.find(p);
            const auto& ca = ita == pa.end() ? kEmpty : ita->second;
            const auto& cb = itpb == pb.end() ? kEmpty : itpb->second;
            std::vector<int64_t> oa, ob;
            std::set_difference(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(oa));
            std::set_difference(cb.begin(), cb.end(), ca.begin(), ca.end(), std::back_inserter(ob));
            if (!oa.empty()) d.only_a[p] = std::move(oa);
            if (!ob.empty()) d.only_b[p] = std::move(ob);
        }
        if (!d.only_a.empty() || !d.only_b.empty()) {
            rep.equal = false;
            rep.differences.push_back(std::move(d));
        }
    }
    return rep;
}

std::string serialize_equality_report(const EqualityReport& rep) {
    Json j;
    j["equal"] = rep.equal;
    j["universe_only_a"] = rep.universe_only_a;
    j["universe_only_b"] = rep.universe_only_b;
    Json diffs = Json::array();
    for (const MapDifference& d : rep.differences) {
        Json jd;
        jd["feature"] = d.feature;
        Json oa = Json::object(), ob = Json::object();
        for (const auto& [p, coords] : d.only_a) oa[p] = runs_to_json(coords);
        for (const auto& [p, coords] : d.only_b) ob[p] = runs_to_json(coords);
        jd["only_a"] = std::move(oa);
        jd["only_b"] = std::move(ob);
        diffs.push_back(std::move(jd));
    }
    j["differences"] = std::move(diffs);
    return canonical_dump(j);
}

} // namespace graft
