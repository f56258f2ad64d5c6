#pragma once

#include "engine/engine.hpp"
#include "ir/json_io.hpp"
#include "ir/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace graft::testing {

// incremental graph construction sugar for fixtures and the generator
class GraphBuilder {
public:
    int64_t input(Shape shape, std::vector<std::string> schema);
    int64_t param(std::string name, Shape shape);
    int64_t matmul(int64_t a, int64_t b) { return binary(OpKind::Matmul, a, b); }
    int64_t add(int64_t a, int64_t b) { return binary(OpKind::Add, a, b); }
    int64_t mul(int64_t a, int64_t b) { return binary(OpKind::Mul, a, b); }
    int64_t unary(OpKind kind, int64_t a);
    int64_t concat(std::vector<int64_t> inputs, int64_t axis);
    int64_t slice(int64_t a, std::vector<int64_t> begin, std::vector<int64_t> end);
    int64_t pool(OpKind kind, int64_t a, int64_t window, int64_t stride);
    Graph build(std::vector<int64_t> outputs) &&;

private:
    int64_t binary(OpKind kind, int64_t a, int64_t b);
    std::vector<Node> nodes_;
};

// spec'd six-node fixture: Y = sigmoid(X.W + b), X carries [hp, mana]
std::string tiny_fc_json();
Graph tiny_fc();
// schema edits of the same model
Graph tiny_fc_inserted();   // [hp, stamina, mana], W grows to [3,2]
Graph tiny_fc_removed();    // [hp], W shrinks to [1,2]
Graph tiny_fc_reordered();  // [mana, hp]

// two-branch fixture: two feature groups through separate FC stacks, then
// concat into a deeper FC
Graph two_branch();
Graph two_branch_swapped();  // concat order flipped

// same topology with arbitrary per-branch schemas (branch FC widths stay 2)
Graph branchy(std::vector<std::string> schema1, std::vector<std::string> schema2);

ParamStore tiny_fc_identity_params();

// adversarial fixtures for gradient masking: graph plus hand-set params
struct MaskFixture {
    Graph graph;
    ParamStore params;
};
MaskFixture relu_mask_fixture();     // negative weight kills a relu branch
MaskFixture maxpool_mask_fixture();  // pooling hides the non-argmax column

} // namespace graft::testing
