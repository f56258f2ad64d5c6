#include "map/mappers.hpp"

#include "support/error.hpp"

#include <deque>
#include <set>

namespace graft {

namespace {

// Explicit scalar-level dataflow graph. Value-producing ops allocate one
// scalar per output element; slice/concat alias existing scalars. Each
// parameter element additionally owns a collector scalar that receives the
// labels of everything it directly interacts with.
class ScalarGraph {
public:
    uint32_t fresh() {
        succ_.emplace_back();
        labels_.emplace_back();
        return static_cast<uint32_t>(succ_.size() - 1);
    }

    void edge(uint32_t src, uint32_t dst) {
        if (++edge_count_ > kOracleEdgeBudget)
            fail(ErrorKind::Resource,
                 "oracle refuses graphs with more than " + std::to_string(kOracleEdgeBudget) +
                     " scalar edges");
        succ_[src].push_back(dst);
    }

    void seed(uint32_t node, uint32_t label) { labels_[node].insert(label); }

    void propagate() {
        std::deque<uint32_t> worklist;
        std::vector<bool> queued(succ_.size(), false);
        for (uint32_t v = 0; v < succ_.size(); ++v)
            if (!labels_[v].empty()) {
                worklist.push_back(v);
                queued[v] = true;
            }
        while (!worklist.empty()) {
            uint32_t v = worklist.front();
            worklist.pop_front();
            queued[v] = false;
            for (uint32_t s : succ_[v]) {
                size_t before = labels_[s].size();
                labels_[s].insert(labels_[v].begin(), labels_[v].end());
                if (labels_[s].size() != before && !queued[s]) {
                    worklist.push_back(s);
                    queued[s] = true;
                }
            }
        }
    }

    const std::set<uint32_t>& labels(uint32_t v) const { return labels_[v]; }

private:
    std::vector<std::vector<uint32_t>> succ_;
    std::vector<std::set<uint32_t>> labels_;
    uint64_t edge_count_ = 0;
};

} // namespace

InteractionMap oracle_map(const Graph& graph) {
    ScalarGraph sg;
    // value scalar ids per node element (aliased through slice/concat)
    std::vector<std::vector<uint32_t>> val(graph.size());
    // collector scalar per param-value scalar, 0 when the scalar is no param;
    // a collector can never be id 0 because its value scalar precedes it
    std::vector<uint32_t> collector_of;
    auto alloc = [&]() -> uint32_t {
        uint32_t v = sg.fresh();
        collector_of.push_back(0);
        return v;
    };

    auto interact = [&](uint32_t a, uint32_t b, uint32_t out) {
        sg.edge(a, out);
        sg.edge(b, out);
        if (collector_of[a]) sg.edge(b, collector_of[a]);
        if (collector_of[b]) sg.edge(a, collector_of[b]);
    };

    for (const Node& n : graph.nodes()) {
        auto& out = val[static_cast<size_t>(n.id)];
        size_t count = static_cast<size_t>(elem_count(graph.shape(n.id)));
        auto src = [&](size_t i) -> const std::vector<uint32_t>& {
            return val[static_cast<size_t>(n.inputs[i])];
        };

        switch (n.kind) {
            case OpKind::Input: {
                out.resize(count);
                uint32_t base = *graph.feature_id(n.schema[0]);
                for (size_t e = 0; e < count; ++e) {
                    out[e] = alloc();
                    sg.seed(out[e], base + static_cast<uint32_t>(e));
                }
                break;
            }
            case OpKind::Param: {
                out.resize(count);
                for (size_t e = 0; e < count; ++e) {
                    out[e] = alloc();
                    collector_of[out[e]] = alloc();
                }
                break;
            }
            case OpKind::Slice: {
                const Shape& s = graph.shape(n.inputs[0]);
                if (s.size() == 1) {
                    for (int64_t i = n.begin[0]; i < n.end[0]; ++i)
                        out.push_back(src(0)[static_cast<size_t>(i)]);
                } else {
                    int64_t cols = s[1];
                    for (int64_t r = n.begin[0]; r < n.end[0]; ++r)
                        for (int64_t c = n.begin[1]; c < n.end[1]; ++c)
                            out.push_back(src(0)[static_cast<size_t>(r * cols + c)]);
                }
                break;
            }
            case OpKind::Concat: {
                const Shape& os = graph.shape(n.id);
                int64_t rank = static_cast<int64_t>(os.size());
                if (n.axis == rank - 1 && rank == 2 && os[0] > 1) {
                    int64_t rows = os[0];
                    out.resize(count);
                    int64_t out_cols = os.back();
                    int64_t col0 = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        int64_t cols = graph.shape(n.inputs[i]).back();
                        for (int64_t r = 0; r < rows; ++r)
                            for (int64_t c = 0; c < cols; ++c)
                                out[static_cast<size_t>(r * out_cols + col0 + c)] =
                                    src(i)[static_cast<size_t>(r * cols + c)];
                        col0 += cols;
                    }
                } else {
                    // rank-1, single-row, or axis-0 concat: plain block copy
                    for (size_t i = 0; i < n.inputs.size(); ++i)
                        out.insert(out.end(), src(i).begin(), src(i).end());
                }
                break;
            }
            case OpKind::Matmul: {
                int64_t N = graph.shape(n.inputs[0])[1], M = graph.shape(n.inputs[1])[1];
                out.resize(count);
                for (int64_t k = 0; k < M; ++k) {
                    uint32_t y = alloc();
                    out[static_cast<size_t>(k)] = y;
                    for (int64_t i = 0; i < N; ++i)
                        interact(src(0)[static_cast<size_t>(i)],
                                 src(1)[static_cast<size_t>(i * M + k)], y);
                }
                break;
            }
            case OpKind::Add:
            case OpKind::Mul: {
                const Shape& sa = graph.shape(n.inputs[0]);
                const Shape& sb = graph.shape(n.inputs[1]);
                const Shape& so = graph.shape(n.id);
                int64_t rows = so.size() == 2 ? so[0] : 1;
                int64_t cols = so.back();
                bool a_row = sa.size() == 1 && so.size() == 2;
                bool b_row = sb.size() == 1 && so.size() == 2;
                out.resize(count);
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c = 0; c < cols; ++c) {
                        uint32_t y = alloc();
                        out[static_cast<size_t>(r * cols + c)] = y;
                        interact(src(0)[static_cast<size_t>(a_row ? c : r * cols + c)],
                                 src(1)[static_cast<size_t>(b_row ? c : r * cols + c)], y);
                    }
                break;
            }
            case OpKind::Sigmoid:
            case OpKind::Tanh:
            case OpKind::Relu: {
                out.resize(count);
                for (size_t e = 0; e < count; ++e) {
                    out[e] = alloc();
                    sg.edge(src(0)[e], out[e]);
                }
                break;
            }
            case OpKind::AvgPool:
            case OpKind::MaxPool: {
                const Shape& s = graph.shape(n.inputs[0]);
                int64_t rows = s.size() == 2 ? s[0] : 1;
                int64_t len = s.back();
                int64_t out_len = (len - n.window) / n.stride + 1;
                out.resize(count);
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t o = 0; o < out_len; ++o) {
                        uint32_t y = alloc();
                        out[static_cast<size_t>(r * out_len + o)] = y;
                        for (int64_t w = 0; w < n.window; ++w)
                            sg.edge(src(0)[static_cast<size_t>(r * len + o * n.stride + w)], y);
                    }
                break;
            }
            case OpKind::Sum: {
                uint32_t y = alloc();
                out.assign(1, y);
                for (uint32_t s : src(0)) sg.edge(s, y);
                break;
            }
        }
    }

    sg.propagate();

    InteractionMap map;
    for (const std::string& name : graph.feature_names()) map.features[name];
    for (const auto& [name, id] : graph.params()) {
        const auto& scalars = val[static_cast<size_t>(id)];
        for (size_t e = 0; e < scalars.size(); ++e)
            for (uint32_t fid : sg.labels(collector_of[scalars[e]]))
                map.add(graph.feature_names()[fid], name, static_cast<int64_t>(e));
    }
    map.normalize();
    return map;
}

} // namespace graft
