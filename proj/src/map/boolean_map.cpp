#include "map/mappers.hpp"

namespace graft {

std::vector<std::vector<ParamRef>> param_provenance(const Graph& graph) {
    std::vector<std::vector<ParamRef>> prov(graph.size());
    for (const Node& n : graph.nodes()) {
        auto& out = prov[static_cast<size_t>(n.id)];
        out.assign(static_cast<size_t>(elem_count(graph.shape(n.id))), ParamRef{});
        switch (n.kind) {
            case OpKind::Param:
                for (size_t e = 0; e < out.size(); ++e)
                    out[e] = ParamRef{n.id, static_cast<int64_t>(e)};
                break;
            case OpKind::Slice: {
                const auto& src = prov[static_cast<size_t>(n.inputs[0])];
                const Shape& s = graph.shape(n.inputs[0]);
                if (s.size() == 1) {
                    for (int64_t i = n.begin[0]; i < n.end[0]; ++i)
                        out[static_cast<size_t>(i - n.begin[0])] = src[static_cast<size_t>(i)];
                } else {
                    int64_t cols = s[1], out_cols = n.end[1] - n.begin[1];
                    for (int64_t r = n.begin[0]; r < n.end[0]; ++r)
                        for (int64_t c = n.begin[1]; c < n.end[1]; ++c)
                            out[static_cast<size_t>((r - n.begin[0]) * out_cols + (c - n.begin[1]))] =
                                src[static_cast<size_t>(r * cols + c)];
                }
                break;
            }
            case OpKind::Concat: {
                const Shape& os = graph.shape(n.id);
                int64_t rank = static_cast<int64_t>(os.size());
                if (n.axis == rank - 1) {
                    int64_t rows = rank == 2 ? os[0] : 1;
                    int64_t out_cols = os.back();
                    int64_t col0 = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        const auto& src = prov[static_cast<size_t>(n.inputs[i])];
                        int64_t cols = graph.shape(n.inputs[i]).back();
                        for (int64_t r = 0; r < rows; ++r)
                            for (int64_t c = 0; c < cols; ++c)
                                out[static_cast<size_t>(r * out_cols + col0 + c)] =
                                    src[static_cast<size_t>(r * cols + c)];
                        col0 += cols;
                    }
                } else {
                    size_t off = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        const auto& src = prov[static_cast<size_t>(n.inputs[i])];
                        std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
                        off += src.size();
                    }
                }
                break;
            }
            default:
                break;  // inputs and arithmetic results are not parameter scalars
        }
    }
    return prov;
}

namespace {

struct Annotator {
    // param node id -> its annotation buffer, resolved once
    std::vector<std::vector<FeatureSet>*> by_node;

    Annotator(const Graph& graph, std::map<std::string, std::vector<FeatureSet>>& params)
        : by_node(graph.size(), nullptr) {
        for (const auto& [name, id] : graph.params())
            by_node[static_cast<size_t>(id)] = &params.at(name);
    }

    // side effect of a binary interaction: the parameter operand absorbs
    // the other operand's feature set
    void interact(const ParamRef& pa, const FeatureSet& sa, const ParamRef& pb,
                  const FeatureSet& sb) {
        if (pa.is_param()) (*by_node[static_cast<size_t>(pa.node)])[static_cast<size_t>(pa.elem)] |= sb;
        if (pb.is_param()) (*by_node[static_cast<size_t>(pb.node)])[static_cast<size_t>(pb.elem)] |= sa;
    }
};

} // namespace

BooleanMapResult boolean_map(const Graph& graph) {
    uint32_t width = graph.feature_count();
    auto prov = param_provenance(graph);

    BooleanMapResult res;
    res.annotations.feature_names = graph.feature_names();
    for (const auto& [name, id] : graph.params())
        res.annotations.params[name].assign(
            static_cast<size_t>(elem_count(graph.node(id).shape)), FeatureSet(width));

    Annotator ann(graph, res.annotations.params);
    auto& sets = res.node_sets;
    sets.resize(graph.size());

    for (const Node& n : graph.nodes()) {
        auto& out = sets[static_cast<size_t>(n.id)];
        out.assign(static_cast<size_t>(elem_count(graph.shape(n.id))), FeatureSet(width));
        auto arg = [&](size_t i) -> const std::vector<FeatureSet>& {
            return sets[static_cast<size_t>(n.inputs[i])];
        };
        auto arg_prov = [&](size_t i) -> const std::vector<ParamRef>& {
            return prov[static_cast<size_t>(n.inputs[i])];
        };

        switch (n.kind) {
            case OpKind::Input: {
                uint32_t base = *graph.feature_id(n.schema[0]);
                for (size_t e = 0; e < out.size(); ++e) out[e].set(base + static_cast<uint32_t>(e));
                break;
            }
            case OpKind::Param:
                break;  // parameter scalars carry the empty set
            case OpKind::Matmul: {
                int64_t N = graph.shape(n.inputs[0])[1], M = graph.shape(n.inputs[1])[1];
                const auto& x = arg(0);
                const auto& w = arg(1);
                const auto& px = arg_prov(0);
                const auto& pw = arg_prov(1);
                for (int64_t k = 0; k < M; ++k) {
                    FeatureSet& acc = out[static_cast<size_t>(k)];
                    for (int64_t i = 0; i < N; ++i) {
                        size_t xi = static_cast<size_t>(i), wi = static_cast<size_t>(i * M + k);
                        acc |= x[xi];
                        acc |= w[wi];
                        ann.interact(px[xi], x[xi], pw[wi], w[wi]);
                    }
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
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t c = 0; c < cols; ++c) {
                        size_t ai = static_cast<size_t>(a_row ? c : r * cols + c);
                        size_t bi = static_cast<size_t>(b_row ? c : r * cols + c);
                        size_t oi = static_cast<size_t>(r * cols + c);
                        out[oi] |= arg(0)[ai];
                        out[oi] |= arg(1)[bi];
                        ann.interact(arg_prov(0)[ai], arg(0)[ai], arg_prov(1)[bi], arg(1)[bi]);
                    }
                break;
            }
            case OpKind::Concat: {
                const Shape& os = graph.shape(n.id);
                int64_t rank = static_cast<int64_t>(os.size());
                if (n.axis == rank - 1) {
                    int64_t rows = rank == 2 ? os[0] : 1;
                    int64_t out_cols = os.back();
                    int64_t col0 = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        int64_t cols = graph.shape(n.inputs[i]).back();
                        for (int64_t r = 0; r < rows; ++r)
                            for (int64_t c = 0; c < cols; ++c)
                                out[static_cast<size_t>(r * out_cols + col0 + c)] =
                                    arg(i)[static_cast<size_t>(r * cols + c)];
                        col0 += cols;
                    }
                } else {
                    size_t off = 0;
                    for (size_t i = 0; i < n.inputs.size(); ++i) {
                        const auto& src = arg(i);
                        std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
                        off += src.size();
                    }
                }
                break;
            }
            case OpKind::Slice: {
                const Shape& s = graph.shape(n.inputs[0]);
                const auto& src = arg(0);
                if (s.size() == 1) {
                    for (int64_t i = n.begin[0]; i < n.end[0]; ++i)
                        out[static_cast<size_t>(i - n.begin[0])] = src[static_cast<size_t>(i)];
                } else {
                    int64_t cols = s[1], out_cols = n.end[1] - n.begin[1];
                    for (int64_t r = n.begin[0]; r < n.end[0]; ++r)
                        for (int64_t c = n.begin[1]; c < n.end[1]; ++c)
                            out[static_cast<size_t>((r - n.begin[0]) * out_cols + (c - n.begin[1]))] =
                                src[static_cast<size_t>(r * cols + c)];
                }
                break;
            }
            case OpKind::Sigmoid:
            case OpKind::Tanh:
            case OpKind::Relu:
                out = arg(0);
                break;
            case OpKind::AvgPool:
            case OpKind::MaxPool: {
                const Shape& s = graph.shape(n.inputs[0]);
                int64_t rows = s.size() == 2 ? s[0] : 1;
                int64_t len = s.back();
                int64_t out_len = (len - n.window) / n.stride + 1;
                const auto& src = arg(0);
                for (int64_t r = 0; r < rows; ++r)
                    for (int64_t o = 0; o < out_len; ++o) {
                        FeatureSet& acc = out[static_cast<size_t>(r * out_len + o)];
                        for (int64_t w = 0; w < n.window; ++w)
                            acc |= src[static_cast<size_t>(r * len + o * n.stride + w)];
                    }
                break;
            }
            case OpKind::Sum: {
                FeatureSet& acc = out[0];
                for (const FeatureSet& s : arg(0)) acc |= s;
                break;
            }
        }
    }

    res.map = res.annotations.to_interaction_map();
    return res;
}

} // namespace graft
