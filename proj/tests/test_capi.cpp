#include <graft/graft.h>

#include <doctest.h>

#include <cmath>
#include <string>

namespace {

const char* kTinyFc =
    R"({"nodes":[{"id":0,"kind":"input","shape":[1,2],"schema":["hp","mana"]},)"
    R"({"id":1,"kind":"param","name":"W","shape":[2,2]},)"
    R"({"id":2,"kind":"matmul","inputs":[0,1]},)"
    R"({"id":3,"kind":"param","name":"b","shape":[2]},)"
    R"({"id":4,"kind":"add","inputs":[2,3]},)"
    R"({"id":5,"kind":"sigmoid","inputs":[4]}],"outputs":[5]})";

const char* kTinyFcInserted =
    R"({"nodes":[{"id":0,"kind":"input","shape":[1,3],"schema":["hp","stamina","mana"]},)"
    R"({"id":1,"kind":"param","name":"W","shape":[3,2]},)"
    R"({"id":2,"kind":"matmul","inputs":[0,1]},)"
    R"({"id":3,"kind":"param","name":"b","shape":[2]},)"
    R"({"id":4,"kind":"add","inputs":[2,3]},)"
    R"({"id":5,"kind":"sigmoid","inputs":[4]}],"outputs":[5]})";

struct Cleanup {
    graft_graph* g1 = nullptr;
    graft_graph* g2 = nullptr;
    graft_params* p1 = nullptr;
    graft_params* p2 = nullptr;
    graft_map* m1 = nullptr;
    graft_map* m2 = nullptr;
    graft_diff* d = nullptr;
    graft_plan* pl = nullptr;
    ~Cleanup() {
        graft_graph_free(g1);
        graft_graph_free(g2);
        graft_params_free(p1);
        graft_params_free(p2);
        graft_map_free(m1);
        graft_map_free(m2);
        graft_diff_free(d);
        graft_plan_free(pl);
    }
};

std::string take(char* s) {
    std::string out = s ? s : "";
    graft_string_free(s);
    return out;
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(graft_version()) == GRAFT_VERSION);
    CHECK(std::string(graft_status_name(GRAFT_OK)) == "ok");
    CHECK(std::string(graft_status_name(GRAFT_ERR_PARSE)) == "parse error");
}

TEST_CASE("graph parse, serialize, hash") {
    Cleanup c;
    REQUIRE(graft_graph_from_json(kTinyFc, &c.g1) == GRAFT_OK);
    char* json = nullptr;
    REQUIRE(graft_graph_to_json(c.g1, &json) == GRAFT_OK);
    std::string text = take(json);
    CHECK(text.find("\"hp\"") != std::string::npos);

    REQUIRE(graft_graph_from_json(text.c_str(), &c.g2) == GRAFT_OK);
    char* json2 = nullptr;
    REQUIRE(graft_graph_to_json(c.g2, &json2) == GRAFT_OK);
    CHECK(take(json2) == text);

    char* hash = nullptr;
    REQUIRE(graft_graph_hash(c.g1, &hash) == GRAFT_OK);
    CHECK(take(hash).size() == 16);
}

TEST_CASE("error paths set status and message") {
    graft_graph* g = nullptr;
    CHECK(graft_graph_from_json("{not json", &g) == GRAFT_ERR_PARSE);
    CHECK(std::string(graft_last_error()).size() > 0);
    CHECK(g == nullptr);

    CHECK(graft_graph_from_json(nullptr, &g) == GRAFT_ERR_INVALID_ARG);
    CHECK(graft_graph_from_json(
              R"({"nodes":[{"id":0,"kind":"input","shape":[1,1],"schema":["a","a"]}],"outputs":[0]})",
              &g) == GRAFT_ERR_VALIDATE);

    graft_params* p = nullptr;
    CHECK(graft_params_from_json(R"({"params":{"W":{"shape":[2],"data":[1.0]}}})", &p) ==
          GRAFT_ERR_PARSE);
}

TEST_CASE("the three mappers agree through the C API") {
    Cleanup c;
    REQUIRE(graft_graph_from_json(kTinyFc, &c.g1) == GRAFT_OK);
    REQUIRE(graft_map_boolean(c.g1, &c.m1) == GRAFT_OK);
    REQUIRE(graft_map_gradient(c.g1, 7, &c.m2) == GRAFT_OK);

    int equal = 0;
    REQUIRE(graft_maps_equal(c.m1, c.m2, &equal, nullptr) == GRAFT_OK);
    CHECK(equal == 1);

    uint64_t total = 0;
    REQUIRE(graft_map_total(c.m1, &total) == GRAFT_OK);
    CHECK(total == 8);

    graft_map* oracle = nullptr;
    REQUIRE(graft_map_oracle(c.g1, &oracle) == GRAFT_OK);
    REQUIRE(graft_maps_equal(c.m1, oracle, &equal, nullptr) == GRAFT_OK);
    CHECK(equal == 1);
    graft_map_free(oracle);

    char* json = nullptr;
    REQUIRE(graft_map_to_json(c.m1, &json) == GRAFT_OK);
    std::string text = take(json);
    graft_map* parsed = nullptr;
    REQUIRE(graft_map_from_json(text.c_str(), &parsed) == GRAFT_OK);
    char* json2 = nullptr;
    REQUIRE(graft_map_to_json(parsed, &json2) == GRAFT_OK);
    CHECK(take(json2) == text);
    graft_map_free(parsed);
}

TEST_CASE("full surgery pipeline through the C API") {
    Cleanup c;
    REQUIRE(graft_graph_from_json(kTinyFc, &c.g1) == GRAFT_OK);
    REQUIRE(graft_graph_from_json(kTinyFcInserted, &c.g2) == GRAFT_OK);
    REQUIRE(graft_params_init(c.g1, GRAFT_INIT_SIGNED, 42, &c.p1) == GRAFT_OK);

    REQUIRE(graft_map_boolean(c.g1, &c.m1) == GRAFT_OK);
    REQUIRE(graft_map_boolean(c.g2, &c.m2) == GRAFT_OK);
    REQUIRE(graft_diff_compute(c.g1, c.m1, c.g2, c.m2, nullptr, &c.d) == GRAFT_OK);
    REQUIRE(graft_plan_make(c.d, GRAFT_PLAN_INIT_ZERO, &c.pl) == GRAFT_OK);

    double transfer = 0.0;
    REQUIRE(graft_plan_apply(c.pl, c.p1, c.g2, 0, &c.p2, &transfer) == GRAFT_OK);
    CHECK(transfer == doctest::Approx(75.0));

    double max_diff = 1.0;
    char* report = nullptr;
    REQUIRE(graft_verify_equivalence(c.g1, c.p1, c.g2, c.p2, 100, 5, &max_diff, &report) ==
            GRAFT_OK);
    CHECK(max_diff <= 1e-9);
    std::string rj = take(report);
    CHECK(rj.find("\"states\":100") != std::string::npos);
    CHECK(rj.find("max_abs_diff") != std::string::npos);

    graft_params* bad = nullptr;
    CHECK(graft_plan_apply(c.pl, c.p1, c.g1, 0, &bad, nullptr) == GRAFT_ERR_MISMATCH);
    CHECK(bad == nullptr);

    char* pj = nullptr;
    REQUIRE(graft_plan_to_json(c.pl, &pj) == GRAFT_OK);
    std::string pt = take(pj);
    graft_plan* reparsed = nullptr;
    REQUIRE(graft_plan_from_json(pt.c_str(), &reparsed) == GRAFT_OK);
    char* pj2 = nullptr;
    REQUIRE(graft_plan_to_json(reparsed, &pj2) == GRAFT_OK);
    CHECK(take(pj2) == pt);
    graft_plan_free(reparsed);
}

TEST_CASE("mapping-safe transform reports substitutions") {
    Cleanup c;
    REQUIRE(graft_graph_from_json(kTinyFc, &c.g1) == GRAFT_OK);
    char* report = nullptr;
    REQUIRE(graft_graph_mapping_safe(c.g1, &c.g2, &report) == GRAFT_OK);
    std::string rj = take(report);
    CHECK(rj.find("\"from\":\"sigmoid\"") != std::string::npos);
    CHECK(rj.find("\"to\":\"tanh\"") != std::string::npos);
}

TEST_CASE("diagnostic gradient options expose the unsafe configuration") {
    Cleanup c;
    REQUIRE(graft_graph_from_json(kTinyFc, &c.g1) == GRAFT_OK);
    REQUIRE(graft_map_boolean(c.g1, &c.m1) == GRAFT_OK);
    REQUIRE(graft_map_gradient_opts(c.g1, GRAFT_INIT_POSITIVE, 1, 3, nullptr, &c.m2) == GRAFT_OK);
    int equal = 0;
    REQUIRE(graft_maps_equal(c.m1, c.m2, &equal, nullptr) == GRAFT_OK);
    CHECK(equal == 1);
}

TEST_CASE("bench graph generation") {
    Cleanup c;
    graft_graph* g = nullptr;
    REQUIRE(graft_graph_bench(32, 2, &g) == GRAFT_OK);
    c.g1 = g;
    graft_map* m = nullptr;
    REQUIRE(graft_map_boolean(g, &m) == GRAFT_OK);
    c.m1 = m;
    uint64_t total = 0;
    REQUIRE(graft_map_total(m, &total) == GRAFT_OK);
    CHECK(total > 0);
    graft_graph* invalid = nullptr;
    CHECK(graft_graph_bench(0, 2, &invalid) == GRAFT_ERR_INVALID_ARG);
}
