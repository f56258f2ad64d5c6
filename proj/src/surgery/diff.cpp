#include "surgery/diff.hpp"

#include "ir/json_io.hpp"
#include "support/jsonutil.hpp"

#include <algorithm>
#include <set>

namespace graft {

namespace {

// one table entry flattened for matching
struct Candidate {
    GroupKey key;        // original key
    GroupKey projected;  // key restricted to kept names
    const ParamBlock* block;
};

GroupKey project(const GroupKey& key, const std::set<std::string>& kept) {
    GroupKey out;
    for (const std::string& n : key)
        if (kept.contains(n)) out.push_back(n);
    return out;
}

std::vector<Candidate> collect(const GroupTable& table, const std::set<std::string>& kept) {
    std::vector<Candidate> out;
    for (const auto& [key, blocks] : table.groups) {
        GroupKey proj = project(key, kept);
        // a group made purely of inserted/removed names has no counterpart
        // by definition; it must not collide with truly unannotated blocks
        if (!key.empty() && proj.empty()) continue;
        for (const ParamBlock& b : blocks) out.push_back({key, proj, &b});
    }
    return out;
}

std::string candidate_str(const Candidate& c) {
    return "param \"" + c.block->param + "\" group " + group_key_str(c.key) + " (" +
           std::to_string(c.block->elems.size()) + " elements)";
}

} // namespace

MapDiff diff_maps(const Graph& old_graph, const ParamAnnotations& old_ann,
                  const Graph& new_graph, const ParamAnnotations& new_ann,
                  const RenameTable& renames) {
    // apply renames to the old side so the diff runs in new-name space
    ParamAnnotations old_renamed = old_ann;
    for (auto& name : old_renamed.feature_names) {
        auto it = renames.find(name);
        if (it != renames.end()) name = it->second;
    }
    {
        std::set<std::string> seen;
        for (const auto& name : old_renamed.feature_names)
            if (!seen.insert(name).second)
                fail(ErrorKind::Validate, "rename table maps two features onto \"" + name + "\"");
        for (const auto& [from, to] : renames) {
            (void)to;
            if (std::find(old_ann.feature_names.begin(), old_ann.feature_names.end(), from) ==
                old_ann.feature_names.end())
                fail(ErrorKind::Validate, "rename source \"" + from + "\" is not an old-model feature");
        }
    }

    std::set<std::string> old_names(old_renamed.feature_names.begin(),
                                    old_renamed.feature_names.end());
    std::set<std::string> new_names(new_ann.feature_names.begin(), new_ann.feature_names.end());

    MapDiff diff;
    diff.old_hash = graph_hash(old_graph);
    diff.new_hash = graph_hash(new_graph);
    std::set<std::string> kept;
    for (const auto& n : old_names) {
        if (new_names.contains(n)) {
            kept.insert(n);
            diff.kept.push_back(n);
        } else {
            diff.removed.push_back(n);
        }
    }
    for (const auto& n : new_names)
        if (!old_names.contains(n)) diff.inserted.push_back(n);

    for (const auto& [name, id] : new_graph.params())
        diff.new_param_sizes[name] = elem_count(new_graph.node(id).shape);

    GroupTable old_table = build_group_table(old_renamed);
    GroupTable new_table = build_group_table(new_ann);
    std::vector<Candidate> old_cands = collect(old_table, kept);
    std::vector<Candidate> new_cands = collect(new_table, kept);

    // match on (projected key, param, element count)
    using MatchKey = std::tuple<GroupKey, std::string, size_t>;
    std::map<MatchKey, std::vector<const Candidate*>> old_by_key, new_by_key;
    for (const Candidate& c : old_cands)
        old_by_key[{c.projected, c.block->param, c.block->elems.size()}].push_back(&c);
    for (const Candidate& c : new_cands)
        new_by_key[{c.projected, c.block->param, c.block->elems.size()}].push_back(&c);

    std::set<const ParamBlock*> matched_old, matched_new;
    for (const auto& [mk, news] : new_by_key) {
        auto it = old_by_key.find(mk);
        if (it == old_by_key.end()) continue;
        const auto& olds = it->second;
        if (olds.size() > 1 || news.size() > 1) {
            std::string msg = "ambiguous block match for projected group " +
                              group_key_str(std::get<0>(mk)) + "; old candidates:";
            for (const Candidate* c : olds) msg += " " + candidate_str(*c);
            msg += "; new candidates:";
            for (const Candidate* c : news) msg += " " + candidate_str(*c);
            fail(ErrorKind::Ambiguous, msg);
        }
        diff.matched.push_back(BlockMatch{news[0]->key, news[0]->block->param,
                                          olds[0]->block->elems, news[0]->block->elems});
        matched_old.insert(olds[0]->block);
        matched_new.insert(news[0]->block);
    }

    // anything annotated purely with removed/inserted names was skipped by
    // collect(); sweep the full tables for the unmatched remainder
    for (const auto& [key, blocks] : old_table.groups)
        for (const ParamBlock& b : blocks)
            if (!matched_old.contains(&b)) diff.retired.push_back({key, b.param, b.elems});
    for (const auto& [key, blocks] : new_table.groups)
        for (const ParamBlock& b : blocks)
            if (!matched_new.contains(&b)) diff.fresh.push_back({key, b.param, b.elems});

    return diff;
}

namespace {

Json key_to_json(const GroupKey& k) { return Json(k); }

GroupKey key_from_json(const Json& j, const std::string& ctx) {
    if (!j.is_array()) fail(ErrorKind::Parse, ctx + ": \"key\" must be an array of names");
    GroupKey k;
    for (const Json& e : j) {
        if (!e.is_string()) fail(ErrorKind::Parse, ctx + ": \"key\" must be an array of names");
        k.push_back(e.get<std::string>());
    }
    return k;
}

Json elems_to_runs(const std::vector<int64_t>& elems) {
    Json out = Json::array();
    for (auto [s, e] : coalesce_runs(elems)) out.push_back(Json::array({s, e}));
    return out;
}

std::vector<int64_t> elems_from_runs(const Json& j, const std::string& ctx) {
    if (!j.is_array()) fail(ErrorKind::Parse, ctx + ": runs must be an array");
    std::vector<std::pair<int64_t, int64_t>> runs;
    for (const Json& jr : j) {
        if (!jr.is_array() || jr.size() != 2 || !jr[0].is_number_integer() ||
            !jr[1].is_number_integer())
            fail(ErrorKind::Parse, ctx + ": runs must be [start,end) integer pairs");
        runs.emplace_back(jr[0].get<int64_t>(), jr[1].get<int64_t>());
        if (runs.back().first < 0 || runs.back().second <= runs.back().first)
            fail(ErrorKind::Parse, ctx + ": invalid run");
    }
    return expand_runs(runs);
}

std::vector<std::string> names_from_json(const Json& j, const std::string& ctx) {
    if (!j.is_array()) fail(ErrorKind::Parse, ctx + ": expected an array of names");
    std::vector<std::string> out;
    for (const Json& e : j) {
        if (!e.is_string()) fail(ErrorKind::Parse, ctx + ": expected an array of names");
        out.push_back(e.get<std::string>());
    }
    return out;
}

} // namespace

std::string serialize_diff(const MapDiff& diff) {
    Json j;
    j["old_hash"] = diff.old_hash;
    j["new_hash"] = diff.new_hash;
    j["kept"] = diff.kept;
    j["inserted"] = diff.inserted;
    j["removed"] = diff.removed;

    Json matched = Json::array();
    for (const BlockMatch& m : diff.matched) {
        Json jm;
        jm["key"] = key_to_json(m.key);
        jm["param"] = m.param;
        jm["src_runs"] = elems_to_runs(m.src_elems);
        jm["dst_runs"] = elems_to_runs(m.dst_elems);
        jm["moved"] = m.moved();
        matched.push_back(std::move(jm));
    }
    j["matched"] = std::move(matched);

    auto blocks_to_json = [](const std::vector<UnmatchedBlock>& blocks) {
        Json out = Json::array();
        for (const UnmatchedBlock& b : blocks) {
            Json jb;
            jb["key"] = key_to_json(b.key);
            jb["param"] = b.param;
            jb["runs"] = elems_to_runs(b.elems);
            out.push_back(std::move(jb));
        }
        return out;
    };
    j["retired"] = blocks_to_json(diff.retired);
    j["fresh"] = blocks_to_json(diff.fresh);
    j["new_params"] = diff.new_param_sizes;
    return canonical_dump(j);
}

MapDiff parse_diff(std::string_view text) {
    Json j = parse_json(text, "diff file");
    if (!j.is_object()) fail(ErrorKind::Parse, "diff file: expected a JSON object");
    reject_unknown_keys(j,
                        {"old_hash", "new_hash", "kept", "inserted", "removed", "matched",
                         "retired", "fresh", "new_params"},
                        "diff file");

    MapDiff diff;
    diff.old_hash = require_string(j, "old_hash", "diff file");
    diff.new_hash = require_string(j, "new_hash", "diff file");
    diff.kept = names_from_json(require_field(j, "kept", "diff file"), "kept");
    diff.inserted = names_from_json(require_field(j, "inserted", "diff file"), "inserted");
    diff.removed = names_from_json(require_field(j, "removed", "diff file"), "removed");

    const Json& matched = require_field(j, "matched", "diff file");
    if (!matched.is_array()) fail(ErrorKind::Parse, "diff file: \"matched\" must be an array");
    for (const Json& jm : matched) {
        reject_unknown_keys(jm, {"key", "param", "src_runs", "dst_runs", "moved"}, "matched block");
        BlockMatch m;
        m.key = key_from_json(require_field(jm, "key", "matched block"), "matched block");
        m.param = require_string(jm, "param", "matched block");
        m.src_elems = elems_from_runs(require_field(jm, "src_runs", "matched block"), "matched block");
        m.dst_elems = elems_from_runs(require_field(jm, "dst_runs", "matched block"), "matched block");
        if (m.src_elems.size() != m.dst_elems.size())
            fail(ErrorKind::Parse, "matched block for \"" + m.param + "\": src/dst sizes differ");
        diff.matched.push_back(std::move(m));
    }

    auto blocks_from_json = [&](const char* field) {
        std::vector<UnmatchedBlock> out;
        const Json& arr = require_field(j, field, "diff file");
        if (!arr.is_array())
            fail(ErrorKind::Parse, std::string("diff file: \"") + field + "\" must be an array");
        for (const Json& jb : arr) {
            reject_unknown_keys(jb, {"key", "param", "runs"}, field);
            UnmatchedBlock b;
            b.key = key_from_json(require_field(jb, "key", field), field);
            b.param = require_string(jb, "param", field);
            b.elems = elems_from_runs(require_field(jb, "runs", field), field);
            out.push_back(std::move(b));
        }
        return out;
    };
    diff.retired = blocks_from_json("retired");
    diff.fresh = blocks_from_json("fresh");

    const Json& sizes = require_field(j, "new_params", "diff file");
    if (!sizes.is_object()) fail(ErrorKind::Parse, "diff file: \"new_params\" must be an object");
    for (auto it = sizes.begin(); it != sizes.end(); ++it) {
        if (!it.value().is_number_integer())
            fail(ErrorKind::Parse, "diff file: param sizes must be integers");
        diff.new_param_sizes[it.key()] = it.value().get<int64_t>();
    }
    return diff;
}

RenameTable parse_renames(std::string_view text) {
    Json j = parse_json(text, "rename table");
    if (!j.is_object()) fail(ErrorKind::Parse, "rename table: expected a JSON object");
    RenameTable out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_string())
            fail(ErrorKind::Parse, "rename table: values must be feature names");
        out[it.key()] = it.value().get<std::string>();
    }
    return out;
}

} // namespace graft
