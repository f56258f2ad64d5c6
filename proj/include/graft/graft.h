/* graft — neural-network parameter surgery toolkit.
 *
 * C interface to the graft core. All objects are opaque handles created and
 * destroyed through this API; every fallible call returns a graft_status and
 * leaves a human-readable message in graft_last_error() (thread-local).
 * Strings returned through char** are owned by the caller and must be
 * released with graft_string_free().
 *
 * All file payloads are canonical JSON (sorted keys, shortest round-trip
 * decimals): identical inputs always serialize to identical bytes.
 */

#ifndef GRAFT_H
#define GRAFT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define GRAFT_API __declspec(dllexport)
#else
#define GRAFT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define GRAFT_VERSION "1.0.0"

typedef enum graft_status {
    GRAFT_OK = 0,
    GRAFT_ERR_PARSE = 1,      /* malformed file or unknown construct */
    GRAFT_ERR_VALIDATE = 2,   /* structural invariant violated */
    GRAFT_ERR_SHAPE = 3,      /* shape inference failed */
    GRAFT_ERR_IO = 4,         /* file system */
    GRAFT_ERR_NUMERIC = 5,    /* non-finite value where finite required */
    GRAFT_ERR_MISMATCH = 6,   /* artifact identity mismatch (hash, tensors) */
    GRAFT_ERR_AMBIGUOUS = 7,  /* diff cannot decide between candidates */
    GRAFT_ERR_COVERAGE = 8,   /* plan does not tile the target params */
    GRAFT_ERR_RESOURCE = 9,   /* explicit budget exceeded */
    GRAFT_ERR_INVALID_ARG = 10,
    GRAFT_ERR_INTERNAL = 11
} graft_status;

GRAFT_API const char* graft_version(void);
GRAFT_API const char* graft_status_name(graft_status status);
/* message of the last failing call on this thread ("" if none) */
GRAFT_API const char* graft_last_error(void);
GRAFT_API void graft_string_free(char* s);

typedef struct graft_graph graft_graph;
typedef struct graft_params graft_params;
typedef struct graft_map graft_map;
typedef struct graft_diff graft_diff;
typedef struct graft_plan graft_plan;

/* ---- computational graphs ------------------------------------------- */

GRAFT_API graft_status graft_graph_from_json(const char* json, graft_graph** out);
GRAFT_API graft_status graft_graph_to_json(const graft_graph* g, char** out_json);
GRAFT_API void graft_graph_free(graft_graph* g);

/* content hash of the canonical serialization, 16 hex digits */
GRAFT_API graft_status graft_graph_hash(const graft_graph* g, char** out_hex);

/* maxpool->avgpool and sigmoid->tanh substitution; out_report_json (optional)
 * receives [{"node":id,"from":"maxpool","to":"avgpool"},...] */
GRAFT_API graft_status graft_graph_mapping_safe(const graft_graph* g, graft_graph** out,
                                                char** out_report_json);

/* deterministic benchmark model: `features` inputs, `depth` FC tanh layers */
GRAFT_API graft_status graft_graph_bench(int64_t features, int64_t depth, graft_graph** out);

/* ---- parameter stores ------------------------------------------------ */

#define GRAFT_INIT_POSITIVE 0 /* weights uniform [0.1,1]/fan-in, biases 0 */
#define GRAFT_INIT_SIGNED 1   /* all params uniform [-1,1]/fan-in */

GRAFT_API graft_status graft_params_from_json(const char* json, graft_params** out);
GRAFT_API graft_status graft_params_to_json(const graft_params* p, char** out_json);
GRAFT_API void graft_params_free(graft_params* p);
GRAFT_API graft_status graft_params_init(const graft_graph* g, int init_mode, uint64_t seed,
                                         graft_params** out);

/* ---- interaction maps ------------------------------------------------ */

GRAFT_API graft_status graft_map_boolean(const graft_graph* g, graft_map** out);
GRAFT_API graft_status graft_map_gradient(const graft_graph* g, uint64_t seed, graft_map** out);
/* diagnostic variant: choose init mode, disable the safe transform, or
 * probe with explicit params (params may be NULL) */
GRAFT_API graft_status graft_map_gradient_opts(const graft_graph* g, int init_mode,
                                               int apply_safe_transform, uint64_t seed,
                                               const graft_params* params, graft_map** out);
GRAFT_API graft_status graft_map_oracle(const graft_graph* g, graft_map** out);
GRAFT_API graft_status graft_map_from_json(const char* json, graft_map** out);
GRAFT_API graft_status graft_map_to_json(const graft_map* m, char** out_json);
GRAFT_API void graft_map_free(graft_map* m);

GRAFT_API graft_status graft_map_total(const graft_map* m, uint64_t* out);
/* out_equal: 1/0; out_report_json (optional) describes every difference */
GRAFT_API graft_status graft_maps_equal(const graft_map* a, const graft_map* b, int* out_equal,
                                        char** out_report_json);

/* ---- surgery --------------------------------------------------------- */

GRAFT_API graft_status graft_diff_compute(const graft_graph* old_g, const graft_map* old_m,
                                          const graft_graph* new_g, const graft_map* new_m,
                                          const char* renames_json /* nullable */,
                                          graft_diff** out);
GRAFT_API graft_status graft_diff_from_json(const char* json, graft_diff** out);
GRAFT_API graft_status graft_diff_to_json(const graft_diff* d, char** out_json);
GRAFT_API void graft_diff_free(graft_diff* d);

#define GRAFT_PLAN_INIT_ZERO 0
#define GRAFT_PLAN_INIT_POSITIVE_RANDOM 1

GRAFT_API graft_status graft_plan_make(const graft_diff* d, int fresh_init_mode, graft_plan** out);
GRAFT_API graft_status graft_plan_from_json(const char* json, graft_plan** out);
GRAFT_API graft_status graft_plan_to_json(const graft_plan* p, char** out_json);
GRAFT_API void graft_plan_free(graft_plan* p);

/* Executes the plan; refuses hash/coverage violations before any write.
 * out_transfer_pct (optional) receives copied/total*100. */
GRAFT_API graft_status graft_plan_apply(const graft_plan* plan, const graft_params* old_params,
                                        const graft_graph* new_graph, uint64_t seed,
                                        graft_params** out, double* out_transfer_pct);

/* Samples n_states random states and reports
 * {"max_abs_diff":…,"states":…} in out_report_json;
 * out_max_abs_diff (optional) receives the headline number. */
GRAFT_API graft_status graft_verify_equivalence(const graft_graph* old_g,
                                                const graft_params* old_p,
                                                const graft_graph* new_g,
                                                const graft_params* new_p, int64_t n_states,
                                                uint64_t seed, double* out_max_abs_diff,
                                                char** out_report_json);

#ifdef __cplusplus
}
#endif

#endif /* GRAFT_H */
