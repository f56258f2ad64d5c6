#include "graft/graft.h"

#include "bench/benchgen.hpp"
#include "engine/engine.hpp"
#include "ir/json_io.hpp"
#include "map/mappers.hpp"
#include "support/error.hpp"
#include "support/jsonutil.hpp"
#include "surgery/plan.hpp"
#include "surgery/verify.hpp"

#include <cstring>
#include <new>
#include <string>

using namespace graft;

struct graft_graph {
    Graph g;
};
struct graft_params {
    ParamStore p;
};
struct graft_map {
    InteractionMap m;
};
struct graft_diff {
    MapDiff d;
};
struct graft_plan {
    SurgeryPlan p;
};

namespace {

thread_local std::string t_last_error;

graft_status status_of(ErrorKind k) {
    switch (k) {
        case ErrorKind::Parse: return GRAFT_ERR_PARSE;
        case ErrorKind::Validate: return GRAFT_ERR_VALIDATE;
        case ErrorKind::Shape: return GRAFT_ERR_SHAPE;
        case ErrorKind::Io: return GRAFT_ERR_IO;
        case ErrorKind::Numeric: return GRAFT_ERR_NUMERIC;
        case ErrorKind::Mismatch: return GRAFT_ERR_MISMATCH;
        case ErrorKind::Ambiguous: return GRAFT_ERR_AMBIGUOUS;
        case ErrorKind::Coverage: return GRAFT_ERR_COVERAGE;
        case ErrorKind::Resource: return GRAFT_ERR_RESOURCE;
        case ErrorKind::InvalidArg: return GRAFT_ERR_INVALID_ARG;
    }
    return GRAFT_ERR_INTERNAL;
}

// runs fn, mapping exceptions onto status codes + last_error
template <typename Fn>
graft_status guarded(Fn&& fn) {
    try {
        t_last_error.clear();
        fn();
        return GRAFT_OK;
    } catch (const Error& e) {
        t_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        t_last_error = "out of memory";
        return GRAFT_ERR_RESOURCE;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return GRAFT_ERR_INTERNAL;
    } catch (...) {
        t_last_error = "unknown error";
        return GRAFT_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

graft_status require(bool ok, const char* msg) {
    if (ok) return GRAFT_OK;
    t_last_error = msg;
    return GRAFT_ERR_INVALID_ARG;
}

#define GRAFT_REQUIRE(cond, msg)                                   \
    if (graft_status s_ = require((cond), (msg)); s_ != GRAFT_OK) \
    return s_

} // namespace

extern "C" {

const char* graft_version(void) { return GRAFT_VERSION; }

const char* graft_status_name(graft_status status) {
    switch (status) {
        case GRAFT_OK: return "ok";
        case GRAFT_ERR_PARSE: return "parse error";
        case GRAFT_ERR_VALIDATE: return "validation error";
        case GRAFT_ERR_SHAPE: return "shape error";
        case GRAFT_ERR_IO: return "io error";
        case GRAFT_ERR_NUMERIC: return "numeric error";
        case GRAFT_ERR_MISMATCH: return "mismatch error";
        case GRAFT_ERR_AMBIGUOUS: return "ambiguous match";
        case GRAFT_ERR_COVERAGE: return "coverage error";
        case GRAFT_ERR_RESOURCE: return "resource limit";
        case GRAFT_ERR_INVALID_ARG: return "invalid argument";
        case GRAFT_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

const char* graft_last_error(void) { return t_last_error.c_str(); }

void graft_string_free(char* s) { delete[] s; }

/* ---- graphs ---- */

graft_status graft_graph_from_json(const char* json, graft_graph** out) {
    GRAFT_REQUIRE(json && out, "null argument");
    return guarded([&] { *out = new graft_graph{parse_graph(json)}; });
}

graft_status graft_graph_to_json(const graft_graph* g, char** out_json) {
    GRAFT_REQUIRE(g && out_json, "null argument");
    return guarded([&] { *out_json = dup_string(serialize_graph(g->g)); });
}

void graft_graph_free(graft_graph* g) { delete g; }

graft_status graft_graph_hash(const graft_graph* g, char** out_hex) {
    GRAFT_REQUIRE(g && out_hex, "null argument");
    return guarded([&] { *out_hex = dup_string(graph_hash(g->g)); });
}

graft_status graft_graph_mapping_safe(const graft_graph* g, graft_graph** out,
                                      char** out_report_json) {
    GRAFT_REQUIRE(g && out, "null argument");
    return guarded([&] {
        SafeTransform t = mapping_safe_transform(g->g);
        if (out_report_json) {
            Json report = Json::array();
            for (const Substitution& s : t.substitutions) {
                Json js;
                js["node"] = s.node;
                js["from"] = kind_name(s.from);
                js["to"] = kind_name(s.to);
                report.push_back(std::move(js));
            }
            *out_report_json = dup_string(canonical_dump(report));
        }
        *out = new graft_graph{std::move(t.graph)};
    });
}

graft_status graft_graph_bench(int64_t features, int64_t depth, graft_graph** out) {
    GRAFT_REQUIRE(out != nullptr, "null argument");
    return guarded([&] { *out = new graft_graph{make_bench_graph(features, depth)}; });
}

/* ---- params ---- */

graft_status graft_params_from_json(const char* json, graft_params** out) {
    GRAFT_REQUIRE(json && out, "null argument");
    return guarded([&] { *out = new graft_params{parse_params(json)}; });
}

graft_status graft_params_to_json(const graft_params* p, char** out_json) {
    GRAFT_REQUIRE(p && out_json, "null argument");
    return guarded([&] { *out_json = dup_string(serialize_params(p->p)); });
}

void graft_params_free(graft_params* p) { delete p; }

graft_status graft_params_init(const graft_graph* g, int init_mode, uint64_t seed,
                               graft_params** out) {
    GRAFT_REQUIRE(g && out, "null argument");
    GRAFT_REQUIRE(init_mode == GRAFT_INIT_POSITIVE || init_mode == GRAFT_INIT_SIGNED,
                  "unknown init mode");
    return guarded([&] {
        InitMode mode = init_mode == GRAFT_INIT_POSITIVE ? InitMode::Positive : InitMode::Signed;
        *out = new graft_params{init_params(g->g, mode, seed)};
    });
}

/* ---- maps ---- */

graft_status graft_map_boolean(const graft_graph* g, graft_map** out) {
    GRAFT_REQUIRE(g && out, "null argument");
    return guarded([&] { *out = new graft_map{boolean_map(g->g).map}; });
}

graft_status graft_map_gradient(const graft_graph* g, uint64_t seed, graft_map** out) {
    GRAFT_REQUIRE(g && out, "null argument");
    return guarded([&] { *out = new graft_map{gradient_map(g->g, seed)}; });
}

graft_status graft_map_gradient_opts(const graft_graph* g, int init_mode,
                                     int apply_safe_transform, uint64_t seed,
                                     const graft_params* params, graft_map** out) {
    GRAFT_REQUIRE(g && out, "null argument");
    GRAFT_REQUIRE(init_mode == GRAFT_INIT_POSITIVE || init_mode == GRAFT_INIT_SIGNED,
                  "unknown init mode");
    return guarded([&] {
        GradientMapOptions opts;
        opts.init = init_mode == GRAFT_INIT_POSITIVE ? InitMode::Positive : InitMode::Signed;
        opts.safe_transform = apply_safe_transform != 0;
        opts.seed = seed;
        opts.params = params ? &params->p : nullptr;
        *out = new graft_map{gradient_map(g->g, opts)};
    });
}

graft_status graft_map_oracle(const graft_graph* g, graft_map** out) {
    GRAFT_REQUIRE(g && out, "null argument");
    return guarded([&] { *out = new graft_map{oracle_map(g->g)}; });
}

graft_status graft_map_from_json(const char* json, graft_map** out) {
    GRAFT_REQUIRE(json && out, "null argument");
    return guarded([&] { *out = new graft_map{parse_interaction_map(json)}; });
}

graft_status graft_map_to_json(const graft_map* m, char** out_json) {
    GRAFT_REQUIRE(m && out_json, "null argument");
    return guarded([&] { *out_json = dup_string(serialize_interaction_map(m->m)); });
}

void graft_map_free(graft_map* m) { delete m; }

graft_status graft_map_total(const graft_map* m, uint64_t* out) {
    GRAFT_REQUIRE(m && out, "null argument");
    *out = m->m.total_interactions();
    return GRAFT_OK;
}

graft_status graft_maps_equal(const graft_map* a, const graft_map* b, int* out_equal,
                              char** out_report_json) {
    GRAFT_REQUIRE(a && b && out_equal, "null argument");
    return guarded([&] {
        EqualityReport rep = maps_equal(a->m, b->m);
        *out_equal = rep.equal ? 1 : 0;
        if (out_report_json) *out_report_json = dup_string(serialize_equality_report(rep));
    });
}

/* ---- surgery ---- */

graft_status graft_diff_compute(const graft_graph* old_g, const graft_map* old_m,
                                const graft_graph* new_g, const graft_map* new_m,
                                const char* renames_json, graft_diff** out) {
    GRAFT_REQUIRE(old_g && old_m && new_g && new_m && out, "null argument");
    return guarded([&] {
        RenameTable renames;
        if (renames_json) renames = parse_renames(renames_json);
        ParamAnnotations old_ann = annotations_from_map(old_g->g, old_m->m);
        ParamAnnotations new_ann = annotations_from_map(new_g->g, new_m->m);
        *out = new graft_diff{diff_maps(old_g->g, old_ann, new_g->g, new_ann, renames)};
    });
}

graft_status graft_diff_from_json(const char* json, graft_diff** out) {
    GRAFT_REQUIRE(json && out, "null argument");
    return guarded([&] { *out = new graft_diff{parse_diff(json)}; });
}

graft_status graft_diff_to_json(const graft_diff* d, char** out_json) {
    GRAFT_REQUIRE(d && out_json, "null argument");
    return guarded([&] { *out_json = dup_string(serialize_diff(d->d)); });
}

void graft_diff_free(graft_diff* d) { delete d; }

graft_status graft_plan_make(const graft_diff* d, int fresh_init_mode, graft_plan** out) {
    GRAFT_REQUIRE(d && out, "null argument");
    GRAFT_REQUIRE(fresh_init_mode == GRAFT_PLAN_INIT_ZERO ||
                      fresh_init_mode == GRAFT_PLAN_INIT_POSITIVE_RANDOM,
                  "unknown plan init mode");
    return guarded([&] {
        PlanInitMode mode = fresh_init_mode == GRAFT_PLAN_INIT_ZERO ? PlanInitMode::Zero
                                                                    : PlanInitMode::PositiveRandom;
        *out = new graft_plan{make_plan(d->d, mode)};
    });
}

graft_status graft_plan_from_json(const char* json, graft_plan** out) {
    GRAFT_REQUIRE(json && out, "null argument");
    return guarded([&] { *out = new graft_plan{parse_plan(json)}; });
}

graft_status graft_plan_to_json(const graft_plan* p, char** out_json) {
    GRAFT_REQUIRE(p && out_json, "null argument");
    return guarded([&] { *out_json = dup_string(serialize_plan(p->p)); });
}

void graft_plan_free(graft_plan* p) { delete p; }

graft_status graft_plan_apply(const graft_plan* plan, const graft_params* old_params,
                              const graft_graph* new_graph, uint64_t seed, graft_params** out,
                              double* out_transfer_pct) {
    GRAFT_REQUIRE(plan && old_params && new_graph && out, "null argument");
    return guarded([&] {
        ApplyResult res = apply_plan(plan->p, old_params->p, new_graph->g, seed);
        if (out_transfer_pct) *out_transfer_pct = res.transfer_pct;
        *out = new graft_params{std::move(res.params)};
    });
}

graft_status graft_verify_equivalence(const graft_graph* old_g, const graft_params* old_p,
                                      const graft_graph* new_g, const graft_params* new_p,
                                      int64_t n_states, uint64_t seed, double* out_max_abs_diff,
                                      char** out_report_json) {
    GRAFT_REQUIRE(old_g && old_p && new_g && new_p, "null argument");
    return guarded([&] {
        VerifyReport rep =
            verify_equivalence(old_g->g, old_p->p, new_g->g, new_p->p, n_states, seed);
        if (out_max_abs_diff) *out_max_abs_diff = rep.max_abs_diff;
        if (out_report_json) *out_report_json = dup_string(serialize_verify_report(rep));
    });
}

} // extern "C"
