#include "support/graphgen.hpp"

#include "support/rng.hpp"
#include "support/testutil.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace graft::testing {

namespace {

struct Branch {
    int64_t id;
    int64_t width;
};

} // namespace

Graph random_safe_graph(uint64_t seed) {
    Rng rng(seed);
    GraphBuilder gb;

    int64_t total_features = static_cast<int64_t>(rng.uniform_int(2, 64));
    int64_t n_inputs = static_cast<int64_t>(rng.uniform_int(1, std::min<int64_t>(3, total_features)));

    // split the feature universe across the inputs, each part non-empty
    std::vector<int64_t> part_sizes(n_inputs, 1);
    for (int64_t rest = total_features - n_inputs; rest > 0; --rest)
        ++part_sizes[rng.uniform_int(0, n_inputs - 1)];

    std::vector<Branch> branches;
    int64_t feature = 0;
    for (int64_t i = 0; i < n_inputs; ++i) {
        std::vector<std::string> schema;
        for (int64_t f = 0; f < part_sizes[i]; ++f) {
            char buf[24];
            std::snprintf(buf, sizeof buf, "f%02lld", static_cast<long long>(feature++));
            schema.emplace_back(buf);
        }
        branches.push_back({gb.input({1, part_sizes[i]}, std::move(schema)), part_sizes[i]});
    }

    int param_counter = 0;
    auto fresh_param = [&](const char* base) {
        return std::string(base) + std::to_string(param_counter++);
    };

    auto pick_activation = [&]() -> OpKind {
        switch (rng.uniform_int(0, 2)) {
            case 0: return OpKind::Tanh;
            case 1: return OpKind::Relu;
            default: return OpKind::Sigmoid;
        }
    };

    auto fc = [&](Branch br) -> Branch {
        int64_t width = static_cast<int64_t>(rng.uniform_int(2, 16));
        int64_t w = gb.param(fresh_param("W"), {br.width, width});
        int64_t z = gb.matmul(br.id, w);
        if (rng.chance(0.7)) z = gb.add(z, gb.param(fresh_param("b"), {width}));
        return {gb.unary(pick_activation(), z), width};
    };

    auto scale = [&](Branch br) -> Branch {
        int64_t w = gb.param(fresh_param("s"), {br.width});
        int64_t z = gb.mul(br.id, w);
        if (rng.chance(0.4)) z = gb.add(z, gb.param(fresh_param("b"), {br.width}));
        if (rng.chance(0.5)) z = gb.unary(pick_activation(), z);
        return {z, br.width};
    };

    auto pool = [&](Branch br) -> Branch {
        int64_t window = static_cast<int64_t>(rng.uniform_int(2, std::min<int64_t>(4, br.width)));
        // strides that leave no trailing element uncovered
        std::vector<int64_t> strides;
        for (int64_t s = 1; s <= window; ++s)
            if ((br.width - window) % s == 0) strides.push_back(s);
        int64_t stride = strides[rng.uniform_int(0, static_cast<int64_t>(strides.size()) - 1)];
        OpKind kind = rng.chance(0.5) ? OpKind::AvgPool : OpKind::MaxPool;
        return {gb.pool(kind, br.id, window, stride), (br.width - window) / stride + 1};
    };

    int64_t layers = static_cast<int64_t>(rng.uniform_int(2, 4));
    for (int64_t layer = 0; layer < layers; ++layer) {
        // occasionally merge two branches so groups mix like deeper nets do
        if (branches.size() > 1 && rng.chance(0.45)) {
            size_t a = rng.uniform_int(0, branches.size() - 1);
            size_t b = rng.uniform_int(0, branches.size() - 2);
            if (b >= a) ++b;
            if (a > b) std::swap(a, b);
            Branch ba = branches[a], bb = branches[b];
            Branch merged;
            if (ba.width == bb.width && rng.chance(0.3))
                merged = {gb.add(ba.id, bb.id), ba.width};  // input+input union
            else
                merged = {gb.concat({ba.id, bb.id}, 1), ba.width + bb.width};
            branches.erase(branches.begin() + static_cast<std::ptrdiff_t>(b));
            branches[a] = merged;
        }

        std::vector<Branch> next;
        for (Branch br : branches) {
            double roll = rng.uniform01();
            if (roll < 0.55) {
                next.push_back(fc(br));
            } else if (roll < 0.70) {
                next.push_back(scale(br));
            } else if (roll < 0.80 && br.width >= 2) {
                next.push_back(pool(br));
            } else if (roll < 0.90 && br.width >= 2 && branches.size() + next.size() < 4) {
                // split; both halves stay live
                int64_t cut = static_cast<int64_t>(rng.uniform_int(1, br.width - 1));
                next.push_back({gb.slice(br.id, {0, 0}, {1, cut}), cut});
                next.push_back({gb.slice(br.id, {0, cut}, {1, br.width}), br.width - cut});
            } else {
                next.push_back({gb.unary(pick_activation(), br.id), br.width});
            }
        }
        branches = std::move(next);
    }

    Branch last = branches[0];
    if (branches.size() > 1) {
        std::vector<int64_t> ids;
        int64_t width = 0;
        for (const Branch& br : branches) {
            ids.push_back(br.id);
            width += br.width;
        }
        last = {gb.concat(ids, 1), width};
    }
    last = fc(last);
    if (rng.chance(0.25)) last = {gb.unary(OpKind::Sum, last.id), 1};

    return std::move(gb).build({last.id});
}

} // namespace graft::testing
