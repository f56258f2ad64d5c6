// graft command-line front end. Talks to the core exclusively through the
// C API in graft/graft.h; all pipeline state lives in files.

#include <graft/graft.h>

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

struct CliError {
    int exit_code;
    std::string message;
};

[[noreturn]] void die(int code, const std::string& msg) { throw CliError{code, msg}; }

void check(graft_status s) {
    if (s == GRAFT_OK) return;
    int code = s == GRAFT_ERR_INTERNAL ? 2 : 1;
    die(code, std::string(graft_status_name(s)) + ": " + graft_last_error());
}

template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() {
        if (ptr) Free(ptr);
    }
    T** out() { return &ptr; }
    operator T*() const { return ptr; }
    operator const T*() const { return ptr; }
};

using GraphH = Handle<graft_graph, graft_graph_free>;
using ParamsH = Handle<graft_params, graft_params_free>;
using MapH = Handle<graft_map, graft_map_free>;
using DiffH = Handle<graft_diff, graft_diff_free>;
using PlanH = Handle<graft_plan, graft_plan_free>;

struct Str {
    char* s = nullptr;
    Str() = default;
    Str(const Str&) = delete;
    Str& operator=(const Str&) = delete;
    ~Str() { graft_string_free(s); }
    char** out() { return &s; }
    std::string str() const { return s ? s : ""; }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die(1, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) die(1, "cannot open " + path + " for writing");
    out << contents;
    if (!out.good()) die(1, "error writing " + path);
}

void load_graph(const std::string& path, GraphH& g) {
    check(graft_graph_from_json(slurp(path).c_str(), g.out()));
}

void load_params(const std::string& path, ParamsH& p) {
    check(graft_params_from_json(slurp(path).c_str(), p.out()));
}

void load_map(const std::string& path, MapH& m) {
    check(graft_map_from_json(slurp(path).c_str(), m.out()));
}

double time_ms(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

int plan_init_mode(const std::string& name) {
    if (name == "zero") return GRAFT_PLAN_INIT_ZERO;
    if (name == "positive_random") return GRAFT_PLAN_INIT_POSITIVE_RANDOM;
    die(1, "unknown init mode \"" + name + "\" (expected zero|positive_random)");
}

// shared by `surgery`; boolean maps -> diff -> plan -> apply -> verify
struct PipelineResult {
    double transfer_pct;
    double max_abs_diff;
    std::string params_json;
    std::string report_json;
};

PipelineResult run_surgery(const std::string& old_graph_path, const std::string& old_params_path,
                           const std::string& new_graph_path, const std::string& renames_path,
                           const std::string& init_mode, int64_t states, uint64_t seed) {
    GraphH old_g, new_g;
    ParamsH old_p;
    load_graph(old_graph_path, old_g);
    load_graph(new_graph_path, new_g);
    load_params(old_params_path, old_p);

    MapH old_m, new_m;
    check(graft_map_boolean(old_g, old_m.out()));
    check(graft_map_boolean(new_g, new_m.out()));

    std::string renames_json;
    if (!renames_path.empty()) renames_json = slurp(renames_path);

    DiffH diff;
    check(graft_diff_compute(old_g, old_m, new_g, new_m,
                             renames_path.empty() ? nullptr : renames_json.c_str(), diff.out()));

    PlanH plan;
    check(graft_plan_make(diff, plan_init_mode(init_mode), plan.out()));

    ParamsH new_p;
    double transfer_pct = 0.0;
    check(graft_plan_apply(plan, old_p, new_g, seed, new_p.out(), &transfer_pct));

    double max_abs_diff = 0.0;
    Str report;
    check(graft_verify_equivalence(old_g, old_p, new_g, new_p, states, seed, &max_abs_diff,
                                   report.out()));

    Str params_json;
    check(graft_params_to_json(new_p, params_json.out()));

    // fold the transfer percentage into the verify report
    std::string rj = report.str();
    char buf[64];
    std::snprintf(buf, sizeof buf, ",\"transfer_pct\":%.17g}", transfer_pct);
    rj.replace(rj.size() - 1, 1, buf);

    return {transfer_pct, max_abs_diff, params_json.str(), rj};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graft: feature-parameter interaction maps and model surgery"};
    app.require_subcommand(1);

    // map
    auto* map_cmd = app.add_subcommand("map", "compute a feature-parameter interaction map");
    std::string map_graph, map_method = "boolean", map_out, map_init = "positive";
    uint64_t map_seed = 0;
    bool map_no_safe = false;
    map_cmd->add_option("--graph", map_graph, "graph file")->required();
    map_cmd->add_option("--method", map_method, "boolean|gradient|oracle");
    map_cmd->add_option("--seed", map_seed, "probe seed (gradient)");
    map_cmd->add_option("--out", map_out, "output map file")->required();
    map_cmd->add_option("--init", map_init, "gradient init: positive|signed (diagnostic)");
    map_cmd->add_flag("--no-safe-transform", map_no_safe,
                      "skip maxpool/sigmoid substitution (diagnostic)");

    // check
    auto* check_cmd = app.add_subcommand("check", "run all three mappers and compare");
    std::string check_graph;
    uint64_t check_seed = 0;
    check_cmd->add_option("--graph", check_graph, "graph file")->required();
    check_cmd->add_option("--seed", check_seed, "probe seed");

    // diff
    auto* diff_cmd = app.add_subcommand("diff", "diff two interaction maps");
    std::string diff_old_graph, diff_old_map, diff_new_graph, diff_new_map, diff_renames, diff_out;
    diff_cmd->add_option("--old-graph", diff_old_graph)->required();
    diff_cmd->add_option("--old-map", diff_old_map)->required();
    diff_cmd->add_option("--new-graph", diff_new_graph)->required();
    diff_cmd->add_option("--new-map", diff_new_map)->required();
    diff_cmd->add_option("--renames", diff_renames, "old-name -> new-name table");
    diff_cmd->add_option("--out", diff_out)->required();

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "turn a diff into a surgery plan");
    std::string plan_diff, plan_out, plan_init = "zero";
    plan_cmd->add_option("--diff", plan_diff)->required();
    plan_cmd->add_option("--init", plan_init, "fresh-block init: zero|positive_random");
    plan_cmd->add_option("--out", plan_out)->required();

    // apply
    auto* apply_cmd = app.add_subcommand("apply", "apply a surgery plan to old params");
    std::string apply_plan, apply_old_params, apply_new_graph, apply_out;
    uint64_t apply_seed = 0;
    apply_cmd->add_option("--plan", apply_plan)->required();
    apply_cmd->add_option("--old-params", apply_old_params)->required();
    apply_cmd->add_option("--new-graph", apply_new_graph)->required();
    apply_cmd->add_option("--seed", apply_seed, "seed for positive_random init steps");
    apply_cmd->add_option("--out", apply_out)->required();

    // surgery
    auto* surg_cmd = app.add_subcommand("surgery", "one-shot map/diff/plan/apply/verify pipeline");
    std::string surg_old_graph, surg_old_params, surg_new_graph, surg_renames, surg_out,
        surg_report, surg_init = "zero";
    int64_t surg_states = 100;
    uint64_t surg_seed = 0;
    surg_cmd->add_option("--old-graph", surg_old_graph)->required();
    surg_cmd->add_option("--old-params", surg_old_params)->required();
    surg_cmd->add_option("--new-graph", surg_new_graph)->required();
    surg_cmd->add_option("--renames", surg_renames);
    surg_cmd->add_option("--init", surg_init, "fresh-block init: zero|positive_random");
    surg_cmd->add_option("--states", surg_states, "verification states");
    surg_cmd->add_option("--seed", surg_seed);
    surg_cmd->add_option("--report", surg_report, "write the verify report here");
    surg_cmd->add_option("--out", surg_out, "output params file")->required();

    // verify
    auto* ver_cmd = app.add_subcommand("verify", "check output equivalence of two models");
    std::string ver_old_graph, ver_old_params, ver_new_graph, ver_new_params, ver_out;
    int64_t ver_states = 100;
    uint64_t ver_seed = 0;
    ver_cmd->add_option("--old-graph", ver_old_graph)->required();
    ver_cmd->add_option("--old-params", ver_old_params)->required();
    ver_cmd->add_option("--new-graph", ver_new_graph)->required();
    ver_cmd->add_option("--new-params", ver_new_params)->required();
    ver_cmd->add_option("--states", ver_states);
    ver_cmd->add_option("--seed", ver_seed);
    ver_cmd->add_option("--out", ver_out, "write the verify report here");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "time boolean vs gradient mapping (single-threaded)");
    int64_t bench_features = 128, bench_depth = 3;
    uint64_t bench_seed = 0;
    std::string bench_out;
    bench_cmd->add_option("--features", bench_features)->required();
    bench_cmd->add_option("--depth", bench_depth)->required();
    bench_cmd->add_option("--seed", bench_seed);
    bench_cmd->add_option("--out", bench_out, "also write the CSV here");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            std::cerr << "graft: " << e.what() << "\n";
            return 1;
        }

        if (map_cmd->parsed()) {
            GraphH g;
            load_graph(map_graph, g);
            MapH m;
            if (map_method == "boolean") {
                check(graft_map_boolean(g, m.out()));
            } else if (map_method == "gradient") {
                int init = map_init == "signed" ? GRAFT_INIT_SIGNED : GRAFT_INIT_POSITIVE;
                if (map_init != "signed" && map_init != "positive")
                    die(1, "unknown init \"" + map_init + "\" (expected positive|signed)");
                check(graft_map_gradient_opts(g, init, map_no_safe ? 0 : 1, map_seed, nullptr,
                                              m.out()));
            } else if (map_method == "oracle") {
                check(graft_map_oracle(g, m.out()));
            } else {
                die(1, "unknown method \"" + map_method + "\" (expected boolean|gradient|oracle)");
            }
            Str json;
            check(graft_map_to_json(m, json.out()));
            spit(map_out, json.str());
            uint64_t total = 0;
            check(graft_map_total(m, &total));
            std::cout << map_method << " map: " << total << " interactions\n";
        } else if (check_cmd->parsed()) {
            GraphH g;
            load_graph(check_graph, g);
            MapH boolean_m, gradient_m, oracle_m;
            check(graft_map_boolean(g, boolean_m.out()));
            check(graft_map_gradient(g, check_seed, gradient_m.out()));
            check(graft_map_oracle(g, oracle_m.out()));
            int bo = 0, bg = 0;
            Str rep_bo, rep_bg;
            check(graft_maps_equal(boolean_m, oracle_m, &bo, rep_bo.out()));
            check(graft_maps_equal(boolean_m, gradient_m, &bg, rep_bg.out()));
            uint64_t total = 0;
            check(graft_map_total(boolean_m, &total));
            if (bo && bg) {
                std::cout << "3 methods agree: " << total << " interactions\n";
            } else {
                if (!bo) std::cout << "boolean vs oracle: " << rep_bo.str() << "\n";
                if (!bg) std::cout << "boolean vs gradient: " << rep_bg.str() << "\n";
                die(1, "mapping methods disagree");
            }
        } else if (diff_cmd->parsed()) {
            GraphH old_g, new_g;
            MapH old_m, new_m;
            load_graph(diff_old_graph, old_g);
            load_graph(diff_new_graph, new_g);
            load_map(diff_old_map, old_m);
            load_map(diff_new_map, new_m);
            std::string renames_json;
            if (!diff_renames.empty()) renames_json = slurp(diff_renames);
            DiffH d;
            check(graft_diff_compute(old_g, old_m, new_g, new_m,
                                     diff_renames.empty() ? nullptr : renames_json.c_str(),
                                     d.out()));
            Str json;
            check(graft_diff_to_json(d, json.out()));
            spit(diff_out, json.str());
        } else if (plan_cmd->parsed()) {
            DiffH d;
            check(graft_diff_from_json(slurp(plan_diff).c_str(), d.out()));
            PlanH p;
            check(graft_plan_make(d, plan_init_mode(plan_init), p.out()));
            Str json;
            check(graft_plan_to_json(p, json.out()));
            spit(plan_out, json.str());
        } else if (apply_cmd->parsed()) {
            PlanH p;
            check(graft_plan_from_json(slurp(apply_plan).c_str(), p.out()));
            ParamsH old_p;
            load_params(apply_old_params, old_p);
            GraphH new_g;
            load_graph(apply_new_graph, new_g);
            ParamsH new_p;
            double transfer = 0.0;
            check(graft_plan_apply(p, old_p, new_g, apply_seed, new_p.out(), &transfer));
            Str json;
            check(graft_params_to_json(new_p, json.out()));
            spit(apply_out, json.str());
            std::printf("transferred %.2f%%\n", transfer);
        } else if (surg_cmd->parsed()) {
            PipelineResult res = run_surgery(surg_old_graph, surg_old_params, surg_new_graph,
                                             surg_renames, surg_init, surg_states, surg_seed);
            spit(surg_out, res.params_json);
            if (!surg_report.empty()) spit(surg_report, res.report_json);
            std::printf("transferred %.2f%%, max_abs_diff %.1e\n", res.transfer_pct,
                        res.max_abs_diff);
        } else if (ver_cmd->parsed()) {
            GraphH old_g, new_g;
            ParamsH old_p, new_p;
            load_graph(ver_old_graph, old_g);
            load_graph(ver_new_graph, new_g);
            load_params(ver_old_params, old_p);
            load_params(ver_new_params, new_p);
            double max_diff = 0.0;
            Str report;
            check(graft_verify_equivalence(old_g, old_p, new_g, new_p, ver_states, ver_seed,
                                           &max_diff, report.out()));
            if (!ver_out.empty()) spit(ver_out, report.str());
            std::printf("max_abs_diff %.1e over %lld states\n", max_diff,
                        static_cast<long long>(ver_states));
        } else if (bench_cmd->parsed()) {
            // method comparison on one CPU; an explicit GRAFT_THREADS wins
            if (!std::getenv("GRAFT_THREADS")) setenv("GRAFT_THREADS", "1", 1);
            GraphH g;
            check(graft_graph_bench(bench_features, bench_depth, g.out()));
            MapH boolean_m, gradient_m;
            double boolean_ms =
                time_ms([&] { check(graft_map_boolean(g, boolean_m.out())); });
            double gradient_ms =
                time_ms([&] { check(graft_map_gradient(g, bench_seed, gradient_m.out())); });
            int eq = 0;
            check(graft_maps_equal(boolean_m, gradient_m, &eq, nullptr));
            char csv[256];
            std::snprintf(csv, sizeof csv,
                          "method,features,wall_ms\nboolean,%lld,%.3f\ngradient,%lld,%.3f\n",
                          static_cast<long long>(bench_features), boolean_ms,
                          static_cast<long long>(bench_features), gradient_ms);
            std::cout << csv;
            if (!eq) std::cerr << "graft: warning: boolean and gradient maps disagree\n";
            if (!bench_out.empty()) spit(bench_out, csv);
        }
        return 0;
    } catch (const CliError& e) {
        std::cerr << "graft: " << e.message << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "graft: " << e.what() << "\n";
        return 2;
    }
}
