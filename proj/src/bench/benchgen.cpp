#include "bench/benchgen.hpp"

#include "support/error.hpp"

#include <algorithm>
#include <cstdio>

namespace graft {

// Feature groups flow through separate FC branches and meet in one deeper
// FC layer; most parameters therefore interact with one 16-feature group
// while the merge layer sees every feature.
Graph make_bench_graph(int64_t features, int64_t depth) {
    if (features < 1 || features > 4096) fail(ErrorKind::InvalidArg, "features must be in [1,4096]");
    if (depth < 1 || depth > 64) fail(ErrorKind::InvalidArg, "depth must be in [1,64]");

    constexpr int64_t kBranchWidth = 16;

    std::vector<Node> nodes;
    auto add_node = [&](Node n) {
        n.id = static_cast<int64_t>(nodes.size());
        nodes.push_back(std::move(n));
        return nodes.back().id;
    };

    Node input;
    input.kind = OpKind::Input;
    input.shape = {1, features};
    for (int64_t f = 0; f < features; ++f) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "f%04lld", static_cast<long long>(f));
        input.schema.emplace_back(buf);
    }
    int64_t input_id = add_node(std::move(input));

    std::vector<int64_t> branch_heads;
    int64_t n_branches = (features + kBranchWidth - 1) / kBranchWidth;
    for (int64_t br = 0; br < n_branches; ++br) {
        int64_t lo = br * kBranchWidth;
        int64_t hi = std::min(features, lo + kBranchWidth);

        int64_t prev = input_id;
        int64_t width = hi - lo;
        if (n_branches > 1) {
            Node slice;
            slice.kind = OpKind::Slice;
            slice.inputs = {input_id};
            slice.begin = {0, lo};
            slice.end = {1, hi};
            prev = add_node(std::move(slice));
        }

        for (int64_t layer = 0; layer < depth; ++layer) {
            std::string suffix =
                std::to_string(br + 1) + "_" + std::to_string(layer + 1);

            Node w;
            w.kind = OpKind::Param;
            w.param_name = "W" + suffix;
            w.shape = {width, kBranchWidth};
            int64_t w_id = add_node(std::move(w));

            Node mm;
            mm.kind = OpKind::Matmul;
            mm.inputs = {prev, w_id};
            int64_t mm_id = add_node(std::move(mm));

            Node bias;
            bias.kind = OpKind::Param;
            bias.param_name = "b" + suffix;
            bias.shape = {kBranchWidth};
            int64_t b_id = add_node(std::move(bias));

            Node add;
            add.kind = OpKind::Add;
            add.inputs = {mm_id, b_id};
            int64_t add_id = add_node(std::move(add));

            Node act;
            act.kind = OpKind::Tanh;
            act.inputs = {add_id};
            prev = add_node(std::move(act));
            width = kBranchWidth;
        }
        branch_heads.push_back(prev);
    }

    int64_t merged = branch_heads[0];
    int64_t merged_width = kBranchWidth;
    if (branch_heads.size() > 1) {
        Node concat;
        concat.kind = OpKind::Concat;
        concat.inputs = branch_heads;
        concat.axis = 1;
        merged = add_node(std::move(concat));
        merged_width = kBranchWidth * n_branches;
    }

    Node wf;
    wf.kind = OpKind::Param;
    wf.param_name = "Wm";
    wf.shape = {merged_width, kBranchWidth};
    int64_t wf_id = add_node(std::move(wf));

    Node mm;
    mm.kind = OpKind::Matmul;
    mm.inputs = {merged, wf_id};
    int64_t mm_id = add_node(std::move(mm));

    Node bf;
    bf.kind = OpKind::Param;
    bf.param_name = "bm";
    bf.shape = {kBranchWidth};
    int64_t bf_id = add_node(std::move(bf));

    Node add;
    add.kind = OpKind::Add;
    add.inputs = {mm_id, bf_id};
    int64_t add_id = add_node(std::move(add));

    Node act;
    act.kind = OpKind::Tanh;
    act.inputs = {add_id};
    int64_t out = add_node(std::move(act));

    return make_graph(std::move(nodes), {out});
}

} // namespace graft
