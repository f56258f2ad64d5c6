#include "surgery/plan.hpp"

#include "ir/json_io.hpp"
#include "map/interaction_map.hpp"
#include "support/fnv.hpp"
#include "support/jsonutil.hpp"
#include "support/rng.hpp"

#include <algorithm>

namespace graft {

namespace {

// split two equal-length element lists into paired runs that break at the
// contiguity boundaries of either side
void aligned_runs(const std::vector<int64_t>& src, const std::vector<int64_t>& dst,
                  std::vector<std::pair<int64_t, int64_t>>& src_runs,
                  std::vector<std::pair<int64_t, int64_t>>& dst_runs) {
    size_t i = 0;
    while (i < src.size()) {
        size_t j = i + 1;
        while (j < src.size() && src[j] == src[j - 1] + 1 && dst[j] == dst[j - 1] + 1) ++j;
        src_runs.emplace_back(src[i], src[j - 1] + 1);
        dst_runs.emplace_back(dst[i], dst[j - 1] + 1);
        i = j;
    }
}

const char* mode_name(PlanInitMode m) {
    return m == PlanInitMode::Zero ? "zero" : "positive_random";
}

} // namespace

SurgeryPlan make_plan(const MapDiff& diff, PlanInitMode fresh_mode) {
    SurgeryPlan plan;
    plan.old_hash = diff.old_hash;
    plan.new_hash = diff.new_hash;

    for (const BlockMatch& m : diff.matched) {
        PlanStep step;
        step.op = PlanStep::Op::Copy;
        step.src = m.param;
        step.dst = m.param;
        aligned_runs(m.src_elems, m.dst_elems, step.src_runs, step.dst_runs);
        plan.steps.push_back(std::move(step));
    }
    for (const UnmatchedBlock& b : diff.fresh) {
        PlanStep step;
        step.op = PlanStep::Op::Init;
        step.dst = b.param;
        step.mode = fresh_mode;
        for (auto [s, e] : coalesce_runs(b.elems)) step.dst_runs.emplace_back(s, e);
        plan.steps.push_back(std::move(step));
    }

    std::stable_sort(plan.steps.begin(), plan.steps.end(), [](const PlanStep& a, const PlanStep& b) {
        if (a.op != b.op) return a.op == PlanStep::Op::Copy;
        if (a.dst != b.dst) return a.dst < b.dst;
        return a.dst_runs < b.dst_runs;
    });

    // coverage: the dst runs must tile every new parameter exactly
    std::map<std::string, std::vector<std::pair<int64_t, int64_t>>> covered;
    for (const PlanStep& s : plan.steps) {
        auto& runs = covered[s.dst];
        runs.insert(runs.end(), s.dst_runs.begin(), s.dst_runs.end());
    }
    for (const auto& [param, total] : diff.new_param_sizes) {
        auto runs = covered[param];
        std::sort(runs.begin(), runs.end());
        int64_t pos = 0;
        for (auto [s, e] : runs) {
            if (s != pos)
                fail(ErrorKind::Coverage, "plan leaves param \"" + param + "\" elements [" +
                                              std::to_string(pos) + "," + std::to_string(s) +
                                              ") uncovered");
            pos = e;
        }
        if (pos != total)
            fail(ErrorKind::Coverage, "plan leaves param \"" + param + "\" elements [" +
                                          std::to_string(pos) + "," + std::to_string(total) +
                                          ") uncovered");
    }
    for (const auto& [param, runs] : covered)
        if (!diff.new_param_sizes.contains(param))
            fail(ErrorKind::Coverage, "plan writes unknown param \"" + param + "\"");

    return plan;
}

ApplyResult apply_plan(const SurgeryPlan& plan, const ParamStore& old_params,
                       const Graph& new_graph, uint64_t seed) {
    if (plan.new_hash != graph_hash(new_graph))
        fail(ErrorKind::Mismatch, "plan was built for a different new graph (hash " + plan.new_hash +
                                      " vs " + graph_hash(new_graph) + ")");

    // validate every directive before the first write
    std::map<std::string, std::vector<std::pair<int64_t, int64_t>>> covered;
    for (const PlanStep& s : plan.steps) {
        auto pit = new_graph.params().find(s.dst);
        if (pit == new_graph.params().end())
            fail(ErrorKind::Coverage, "plan writes unknown param \"" + s.dst + "\"");
        int64_t dst_total = elem_count(new_graph.node(pit->second).shape);
        for (auto [b, e] : s.dst_runs)
            if (b < 0 || e <= b || e > dst_total)
                fail(ErrorKind::Coverage, "dst run [" + std::to_string(b) + "," + std::to_string(e) +
                                              ") out of bounds for param \"" + s.dst + "\"");
        auto& runs = covered[s.dst];
        runs.insert(runs.end(), s.dst_runs.begin(), s.dst_runs.end());

        if (s.op == PlanStep::Op::Copy) {
            auto src_it = old_params.tensors.find(s.src);
            if (src_it == old_params.tensors.end())
                fail(ErrorKind::Mismatch, "old params lack tensor \"" + s.src + "\"");
            int64_t src_total = static_cast<int64_t>(src_it->second.data.size());
            if (s.src_runs.size() != s.dst_runs.size())
                fail(ErrorKind::Coverage, "copy step for \"" + s.dst + "\" has mismatched run lists");
            for (size_t i = 0; i < s.src_runs.size(); ++i) {
                auto [sb, se] = s.src_runs[i];
                auto [db, de] = s.dst_runs[i];
                if (sb < 0 || se <= sb || se > src_total)
                    fail(ErrorKind::Mismatch, "src run [" + std::to_string(sb) + "," +
                                                  std::to_string(se) + ") out of bounds for \"" +
                                                  s.src + "\"");
                if (se - sb != de - db)
                    fail(ErrorKind::Coverage, "copy step for \"" + s.dst + "\" pairs runs of unequal length");
            }
        }
    }
    for (const auto& [name, id] : new_graph.params()) {
        int64_t total = elem_count(new_graph.node(id).shape);
        auto runs = covered[name];
        std::sort(runs.begin(), runs.end());
        int64_t pos = 0;
        for (auto [b, e] : runs) {
            if (b < pos)
                fail(ErrorKind::Coverage, "plan writes param \"" + name + "\" element " +
                                              std::to_string(b) + " twice");
            if (b > pos)
                fail(ErrorKind::Coverage, "plan leaves param \"" + name + "\" elements [" +
                                              std::to_string(pos) + "," + std::to_string(b) +
                                              ") uncovered");
            pos = e;
        }
        if (pos != total)
            fail(ErrorKind::Coverage, "plan leaves param \"" + name + "\" elements [" +
                                          std::to_string(pos) + "," + std::to_string(total) +
                                          ") uncovered");
    }

    ApplyResult res;
    for (const auto& [name, id] : new_graph.params()) {
        Tensor t;
        t.shape = new_graph.node(id).shape;
        t.data.assign(static_cast<size_t>(elem_count(t.shape)), 0.0);
        res.params.tensors.emplace(name, std::move(t));
        res.total_elems += elem_count(new_graph.node(id).shape);
    }

    for (const PlanStep& s : plan.steps) {
        Tensor& dst = res.params.tensors.at(s.dst);
        if (s.op == PlanStep::Op::Copy) {
            const Tensor& src = old_params.tensors.at(s.src);
            for (size_t i = 0; i < s.src_runs.size(); ++i) {
                auto [sb, se] = s.src_runs[i];
                auto [db, de] = s.dst_runs[i];
                (void)de;
                std::copy(src.data.begin() + sb, src.data.begin() + se, dst.data.begin() + db);
                res.copied_elems += se - sb;
            }
        } else if (s.mode == PlanInitMode::PositiveRandom) {
            int64_t param_node = new_graph.params().at(s.dst);
            if (!new_graph.param_is_bias(param_node)) {
                double fan_in = static_cast<double>(new_graph.param_fan_in(param_node));
                Rng rng(mix_seed(mix_seed(seed, fnv1a64(s.dst)),
                                 static_cast<uint64_t>(s.dst_runs.front().first)));
                for (auto [b, e] : s.dst_runs)
                    for (int64_t i = b; i < e; ++i)
                        dst.data[static_cast<size_t>(i)] = rng.uniform(0.1, 1.0) / fan_in;
            }
            // bias blocks stay zero in either mode
        }
    }

    res.transfer_pct = res.total_elems == 0
                           ? 100.0
                           : 100.0 * static_cast<double>(res.copied_elems) /
                                 static_cast<double>(res.total_elems);
    return res;
}

namespace {

Json runs_to_json(const std::vector<std::pair<int64_t, int64_t>>& runs) {
    Json out = Json::array();
    for (auto [s, e] : runs) out.push_back(Json::array({s, e}));
    return out;
}

std::vector<std::pair<int64_t, int64_t>> runs_from_json(const Json& j, const std::string& ctx) {
    if (!j.is_array()) fail(ErrorKind::Parse, ctx + ": runs must be an array");
    std::vector<std::pair<int64_t, int64_t>> out;
    for (const Json& jr : j) {
        if (!jr.is_array() || jr.size() != 2 || !jr[0].is_number_integer() ||
            !jr[1].is_number_integer())
            fail(ErrorKind::Parse, ctx + ": runs must be [start,end) integer pairs");
        out.emplace_back(jr[0].get<int64_t>(), jr[1].get<int64_t>());
    }
    return out;
}

} // namespace

std::string serialize_plan(const SurgeryPlan& plan) {
    Json j;
    j["old_hash"] = plan.old_hash;
    j["new_hash"] = plan.new_hash;
    Json steps = Json::array();
    for (const PlanStep& s : plan.steps) {
        Json js;
        if (s.op == PlanStep::Op::Copy) {
            js["op"] = "copy";
            js["src"] = s.src;
            js["src_runs"] = runs_to_json(s.src_runs);
        } else {
            js["op"] = "init";
            js["mode"] = mode_name(s.mode);
        }
        js["dst"] = s.dst;
        js["dst_runs"] = runs_to_json(s.dst_runs);
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    return canonical_dump(j);
}

SurgeryPlan parse_plan(std::string_view text) {
    Json j = parse_json(text, "plan file");
    if (!j.is_object()) fail(ErrorKind::Parse, "plan file: expected a JSON object");
    reject_unknown_keys(j, {"old_hash", "new_hash", "steps"}, "plan file");

    SurgeryPlan plan;
    plan.old_hash = require_string(j, "old_hash", "plan file");
    plan.new_hash = require_string(j, "new_hash", "plan file");
    const Json& steps = require_field(j, "steps", "plan file");
    if (!steps.is_array()) fail(ErrorKind::Parse, "plan file: \"steps\" must be an array");

    for (const Json& js : steps) {
        if (!js.is_object()) fail(ErrorKind::Parse, "plan step: expected an object");
        PlanStep step;
        std::string op = require_string(js, "op", "plan step");
        if (op == "copy") {
            reject_unknown_keys(js, {"op", "src", "src_runs", "dst", "dst_runs"}, "plan step");
            step.op = PlanStep::Op::Copy;
            step.src = require_string(js, "src", "plan step");
            step.src_runs = runs_from_json(require_field(js, "src_runs", "plan step"), "plan step");
        } else if (op == "init") {
            reject_unknown_keys(js, {"op", "dst", "dst_runs", "mode"}, "plan step");
            step.op = PlanStep::Op::Init;
            std::string mode = require_string(js, "mode", "plan step");
            if (mode == "zero")
                step.mode = PlanInitMode::Zero;
            else if (mode == "positive_random")
                step.mode = PlanInitMode::PositiveRandom;
            else
                fail(ErrorKind::Parse, "plan step: unknown init mode \"" + mode + "\"");
        } else {
            fail(ErrorKind::Parse, "plan step: unknown op \"" + op + "\"");
        }
        step.dst = require_string(js, "dst", "plan step");
        step.dst_runs = runs_from_json(require_field(js, "dst_runs", "plan step"), "plan step");
        plan.steps.push_back(std::move(step));
    }
    return plan;
}

} // namespace graft
