#include "support/reference.hpp"

#include "support/rng.hpp"

#include <algorithm>
#include <cmath>

namespace graft::testing {

double cost_of(const Graph& graph, const ParamStore& params, const InputMap& inputs) {
    ForwardResult res = forward(graph, params, inputs);
    double c = 0.0;
    for (const Tensor& t : res.outputs)
        for (double v : t.data) c += v;
    return c;
}

GradStore finite_difference_grads(const Graph& graph, const ParamStore& params,
                                  const InputMap& inputs, double h) {
    GradStore grads;
    ParamStore work = params;
    for (auto& [name, tensor] : work.tensors) {
        Tensor g;
        g.shape = tensor.shape;
        g.data.resize(tensor.data.size());
        for (size_t i = 0; i < tensor.data.size(); ++i) {
            double saved = tensor.data[i];
            tensor.data[i] = saved + h;
            double up = cost_of(graph, work, inputs);
            tensor.data[i] = saved - h;
            double down = cost_of(graph, work, inputs);
            tensor.data[i] = saved;
            g.data[i] = (up - down) / (2.0 * h);
        }
        grads.emplace(name, std::move(g));
    }
    return grads;
}

double max_relative_error(const GradStore& a, const GradStore& b) {
    double worst = 0.0;
    for (const auto& [name, ta] : a) {
        const Tensor& tb = b.at(name);
        for (size_t i = 0; i < ta.data.size(); ++i) {
            double denom = std::max({1.0, std::fabs(ta.data[i]), std::fabs(tb.data[i])});
            worst = std::max(worst, std::fabs(ta.data[i] - tb.data[i]) / denom);
        }
    }
    return worst;
}

bool kink_margins_ok(const Graph& graph, const ParamStore& params, const InputMap& inputs,
                     double margin) {
    ForwardResult res = forward(graph, params, inputs);
    for (const Node& n : graph.nodes()) {
        if (n.kind == OpKind::Relu) {
            for (double z : res.tape.values[static_cast<size_t>(n.inputs[0])])
                if (std::fabs(z) < margin) return false;
        } else if (n.kind == OpKind::MaxPool) {
            const auto& src = res.tape.values[static_cast<size_t>(n.inputs[0])];
            const Shape& s = graph.shape(n.inputs[0]);
            int64_t rows = s.size() == 2 ? s[0] : 1;
            int64_t len = s.back();
            int64_t out_len = (len - n.window) / n.stride + 1;
            for (int64_t r = 0; r < rows; ++r)
                for (int64_t o = 0; o < out_len; ++o) {
                    double best = -1e300, second = -1e300;
                    for (int64_t w = 0; w < n.window; ++w) {
                        double v = src[static_cast<size_t>(r * len + o * n.stride + w)];
                        if (v > best) {
                            second = best;
                            best = v;
                        } else if (v > second) {
                            second = v;
                        }
                    }
                    if (n.window > 1 && best - second < margin) return false;
                }
        }
    }
    return true;
}

InputMap random_inputs(const Graph& graph, uint64_t seed, double lo, double hi) {
    Rng rng(seed);
    InputMap inputs;
    for (int64_t id : graph.input_ids()) {
        Tensor t;
        t.shape = graph.node(id).shape;
        t.data.resize(static_cast<size_t>(elem_count(t.shape)));
        for (double& v : t.data) v = rng.uniform(lo, hi);
        inputs.emplace(id, std::move(t));
    }
    return inputs;
}

} // namespace graft::testing
