#include "map/mappers.hpp"
#include "support/error.hpp"
#include "support/graphgen.hpp"
#include "support/testutil.hpp"

#include <doctest.h>

using namespace graft;
using namespace graft::testing;

namespace {

InteractionMap tiny_fc_expected() {
    InteractionMap m;
    m.features["hp"]["W"] = {0, 1};
    m.features["hp"]["b"] = {0, 1};
    m.features["mana"]["W"] = {2, 3};
    m.features["mana"]["b"] = {0, 1};
    return m;
}

} // namespace

TEST_CASE("boolean map of tiny-fc matches the forced result") {
    auto res = boolean_map(tiny_fc());
    CHECK(res.map == tiny_fc_expected());
    CHECK(res.map.total_interactions() == 8);
}

TEST_CASE("boolean map of the two-branch graph separates the groups") {
    auto res = boolean_map(two_branch());
    InteractionMap expected;
    expected.features["f1"]["W1"] = {0, 1};
    expected.features["f1"]["b1"] = {0, 1};
    expected.features["f1"]["W3"] = {0, 1, 2, 3};
    expected.features["f1"]["b3"] = {0, 1};
    expected.features["f2"]["W1"] = {2, 3};
    expected.features["f2"]["b1"] = {0, 1};
    expected.features["f2"]["W3"] = {0, 1, 2, 3};
    expected.features["f2"]["b3"] = {0, 1};
    expected.features["f3"]["W2"] = {0, 1};
    expected.features["f3"]["b2"] = {0, 1};
    expected.features["f3"]["W3"] = {4, 5, 6, 7};
    expected.features["f3"]["b3"] = {0, 1};
    CHECK(res.map == expected);
}

TEST_CASE("boolean map never reads params and repeats identically") {
    Graph g = two_branch();
    CHECK(boolean_map(g).map == boolean_map(g).map);
}

TEST_CASE("annotations and interaction map are mutually consistent inverses") {
    for (uint64_t seed : {2u, 9u, 30u}) {
        Graph g = random_safe_graph(seed);
        auto res = boolean_map(g);
        CHECK(res.annotations.to_interaction_map() == res.map);
        ParamAnnotations round = annotations_from_map(g, res.map);
        CHECK(round.to_interaction_map() == res.map);
    }
}

TEST_CASE("gradient map of tiny-fc equals the boolean map") {
    Graph g = tiny_fc();
    CHECK(gradient_map(g, 7) == boolean_map(g).map);
}

TEST_CASE("gradient map is independent of the probe seed in safe configuration") {
    Graph g = two_branch();
    InteractionMap a = gradient_map(g, 1);
    CHECK(a == gradient_map(g, 2));
    CHECK(a == gradient_map(g, 99));
    CHECK(a == boolean_map(g).map);
}

TEST_CASE("dead branches stay exactly zero during probes") {
    // probing f1 must not light up the f3 branch params
    Graph g = two_branch();
    InteractionMap m = gradient_map(g, 5);
    const auto& f1 = m.features.at("f1");
    CHECK_FALSE(f1.contains("W2"));
    CHECK_FALSE(f1.contains("b2"));
    CHECK(f1.at("W3") == std::vector<int64_t>{0, 1, 2, 3});
    const auto& f3 = m.features.at("f3");
    CHECK_FALSE(f3.contains("W1"));
    CHECK(f3.at("W3") == std::vector<int64_t>{4, 5, 6, 7});
}

TEST_CASE("a hand-set negative weight masks interactions from raw gradient probing") {
    MaskFixture fx = relu_mask_fixture();
    InteractionMap truth = oracle_map(fx.graph);

    GradientMapOptions raw;
    raw.safe_transform = false;
    raw.params = &fx.params;
    InteractionMap masked = gradient_map(fx.graph, raw);
    CHECK(masked.total_interactions() < truth.total_interactions());
    // the dead relu hides the negative weight and the W2 row behind it
    CHECK(masked.features.at("f0").at("W1") == std::vector<int64_t>{1});
    CHECK(masked.features.at("f0").at("W2") == std::vector<int64_t>{2, 3});
    CHECK(truth.features.at("f0").at("W1") == std::vector<int64_t>{0, 1});
    CHECK(truth.features.at("f0").at("W2") == std::vector<int64_t>{0, 1, 2, 3});

    InteractionMap safe = gradient_map(fx.graph, 3);
    CHECK(safe == truth);
}

TEST_CASE("maxpool masks the non-argmax column from raw gradient probing") {
    MaskFixture fx = maxpool_mask_fixture();
    InteractionMap truth = oracle_map(fx.graph);
    CHECK(truth.features.at("f0").at("W1") == std::vector<int64_t>{0, 1});

    GradientMapOptions raw;
    raw.safe_transform = false;
    raw.params = &fx.params;
    InteractionMap masked = gradient_map(fx.graph, raw);
    CHECK(masked.features.at("f0").at("W1") == std::vector<int64_t>{1});
    CHECK(masked.total_interactions() < truth.total_interactions());

    CHECK(gradient_map(fx.graph, 1) == truth);  // avg substitution restores it
}

TEST_CASE("oracle map agrees with the boolean map on tiny-fc") {
    CHECK(oracle_map(tiny_fc()) == boolean_map(tiny_fc()).map);
}

TEST_CASE("oracle and boolean maps agree on 50 randomized graphs") {
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        Graph g = random_safe_graph(seed);
        CHECK(oracle_map(g) == boolean_map(g).map);
    }
}

TEST_CASE("oracle refuses graphs over the scalar-edge budget") {
    GraphBuilder b;
    std::vector<std::string> schema;
    for (int i = 0; i < 500; ++i) schema.push_back("f" + std::to_string(i));
    int64_t x = b.input({1, 500}, std::move(schema));
    int64_t w = b.param("W", {500, 700});
    int64_t y = b.matmul(x, w);
    Graph g = std::move(b).build({y});
    try {
        oracle_map(g);
        FAIL("expected a resource error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Resource);
    }
}

TEST_CASE("map equality reports the exact differing coordinate") {
    InteractionMap a = tiny_fc_expected();
    InteractionMap b = tiny_fc_expected();
    b.features["mana"]["W"] = {2};  // drop coordinate 3

    EqualityReport rep = maps_equal(a, b);
    CHECK_FALSE(rep.equal);
    REQUIRE(rep.differences.size() == 1);
    CHECK(rep.differences[0].feature == "mana");
    CHECK(rep.differences[0].only_a.at("W") == std::vector<int64_t>{3});
    CHECK(rep.differences[0].only_b.empty());

    CHECK(maps_equal(a, a).equal);
}

TEST_CASE("mismatched universes are reported, not errored") {
    InteractionMap a = tiny_fc_expected();
    InteractionMap b = tiny_fc_expected();
    b.features["stamina"];  // extra feature, no coords
    EqualityReport rep = maps_equal(a, b);
    CHECK_FALSE(rep.equal);
    CHECK(rep.universe_only_b == std::vector<std::string>{"stamina"});
    CHECK(rep.universe_only_a.empty());
}

TEST_CASE("interaction map serialization matches the file format and round-trips") {
    auto res = boolean_map(tiny_fc());
    std::string text = serialize_interaction_map(res.map);
    CHECK(text ==
          R"({"features":{"hp":[{"param":"W","runs":[[0,2]]},{"param":"b","runs":[[0,2]]}],)"
          R"("mana":[{"param":"W","runs":[[2,4]]},{"param":"b","runs":[[0,2]]}]}})");
    CHECK(parse_interaction_map(text) == res.map);

    for (uint64_t seed : {4u, 13u}) {
        InteractionMap m = boolean_map(random_safe_graph(seed)).map;
        CHECK(parse_interaction_map(serialize_interaction_map(m)) == m);
    }
}

TEST_CASE("runs coalesce and expand as half-open intervals") {
    std::vector<int64_t> elems{0, 1, 2, 5, 7, 8};
    auto runs = coalesce_runs(elems);
    REQUIRE(runs.size() == 3);
    CHECK(runs[0] == std::pair<int64_t, int64_t>{0, 3});
    CHECK(runs[1] == std::pair<int64_t, int64_t>{5, 6});
    CHECK(runs[2] == std::pair<int64_t, int64_t>{7, 9});
    CHECK(expand_runs(runs) == elems);
}

TEST_CASE("axis-0 concat keeps the three mappers in agreement") {
    // stack two row activations into a rank-2 value and reduce it
    GraphBuilder b;
    int64_t x = b.input({1, 3}, {"a", "b", "c"});
    int64_t s1 = b.param("s1", {3});
    int64_t s2 = b.param("s2", {3});
    int64_t r1 = b.mul(x, s1);
    int64_t r2 = b.mul(x, s2);
    int64_t stacked = b.concat({r1, r2}, 0);  // [2,3]
    int64_t y = b.unary(OpKind::Sum, stacked);
    Graph g = std::move(b).build({y});

    InteractionMap boolean_m = boolean_map(g).map;
    CHECK(boolean_m == oracle_map(g));
    CHECK(boolean_m == gradient_map(g, 6));
    CHECK(boolean_m.features.at("a").at("s1") == std::vector<int64_t>{0});
    CHECK(boolean_m.features.at("a").at("s2") == std::vector<int64_t>{0});
}

TEST_CASE("gradient probing traces params routed through concat") {
    // block weights: matmul against concat(W_a, W_b) must annotate both
    GraphBuilder b;
    int64_t x = b.input({1, 2}, {"p", "q"});
    int64_t wa = b.param("Wa", {2, 1});
    int64_t wb = b.param("Wb", {2, 1});
    int64_t w = b.concat({wa, wb}, 1);
    int64_t y = b.matmul(x, w);
    Graph g = std::move(b).build({y});

    InteractionMap expected;
    expected.features["p"]["Wa"] = {0};
    expected.features["p"]["Wb"] = {0};
    expected.features["q"]["Wa"] = {1};
    expected.features["q"]["Wb"] = {1};

    CHECK(boolean_map(g).map == expected);
    CHECK(oracle_map(g) == expected);
    CHECK(gradient_map(g, 2) == expected);
}
