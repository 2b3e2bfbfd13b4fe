// Command-line front end for the uavsearch simulator. Links only the C API.

#include <cstdio>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "uavsearch.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

int status_to_exit(uvs_status s) {
    switch (s) {
        case UVS_OK: return kExitOk;
        case UVS_ERR_VALIDATION: return kExitValidation;
        default: return kExitRuntime;
    }
}

struct ScenarioHandle {
    uvs_scenario* ptr = nullptr;
    ~ScenarioHandle() { uvs_scenario_close(ptr); }
};

int open_scenario(const std::string& config, bool override_incline, int snapshot_stride,
                  unsigned seed, ScenarioHandle& handle) {
    const uvs_status st = uvs_scenario_open(config.c_str(), &handle.ptr);
    if (st != UVS_OK) {
        std::fprintf(stderr, "error: %s\n", uvs_last_error());
        return status_to_exit(st);
    }
    uvs_scenario_set_override_incline(handle.ptr, override_incline ? 1 : 0);
    if (snapshot_stride >= 0) uvs_scenario_set_snapshot_stride(handle.ptr, snapshot_stride);
    uvs_scenario_set_seed(handle.ptr, seed);
    return kExitOk;
}

int cmd_validate(const std::string& config, bool override_incline) {
    ScenarioHandle scenario;
    if (int rc = open_scenario(config, override_incline, -1, 0, scenario)) return rc;

    char* report = nullptr;
    int errors = 0, warnings = 0;
    const uvs_status st = uvs_scenario_validate(scenario.ptr, &report, &errors, &warnings);
    if (st != UVS_OK) {
        std::fprintf(stderr, "error: %s\n", uvs_last_error());
        return status_to_exit(st);
    }
    if (report && report[0] != '\0') std::fputs(report, stdout);
    uvs_string_free(report);
    std::printf("%d error(s), %d warning(s)\n", errors, warnings);
    return errors == 0 ? kExitOk : kExitValidation;
}

int cmd_incline(const std::string& config) {
    ScenarioHandle scenario;
    if (int rc = open_scenario(config, false, -1, 0, scenario)) return rc;

    char* table = nullptr;
    int compatible = 0;
    const uvs_status st = uvs_scenario_incline_table(scenario.ptr, &table, &compatible);
    if (st != UVS_OK) {
        std::fprintf(stderr, "error: %s\n", uvs_last_error());
        return status_to_exit(st);
    }
    std::fputs(table, stdout);
    uvs_string_free(table);
    return kExitOk;
}

int cmd_run(const std::string& config, const std::string& out_dir, bool override_incline,
            int snapshot_stride, unsigned seed) {
    ScenarioHandle scenario;
    if (int rc = open_scenario(config, override_incline, snapshot_stride, seed, scenario))
        return rc;

    uvs_run_summary summary{};
    const uvs_status st = uvs_scenario_run(scenario.ptr, out_dir.c_str(), &summary);
    if (st != UVS_OK) {
        std::fprintf(stderr, "error: %s\n", uvs_last_error());
        return status_to_exit(st);
    }
    std::printf("steps:                    %d\n", summary.steps);
    std::printf("final eta:                %.4f\n", summary.final_eta);
    std::printf("mean step compute [s]:    %.4f\n", summary.mean_step_seconds);
    std::printf("max step compute [s]:     %.4f\n", summary.max_step_seconds);
    std::printf("escape activations:       %d\n", summary.escape_activations);
    std::printf("min pairwise clearance:   %.2f\n", summary.min_pairwise_clearance);
    std::printf("min altitude margin [m]:  %.2f\n", summary.min_altitude_margin);
    std::printf("logs written to %s\n", out_dir.c_str());
    return kExitOk;
}

int cmd_export(const std::string& config, const std::string& run_dir,
               const std::string& out_dir) {
    const uvs_status st = uvs_export_plots(config.c_str(), run_dir.c_str(), out_dir.c_str());
    if (st != UVS_OK) {
        std::fprintf(stderr, "error: %s\n", uvs_last_error());
        return status_to_exit(st);
    }
    std::printf("plot data written to %s\n", out_dir.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-UAV terrain-survey simulator"};
    app.require_subcommand(1);

    std::string config, out_dir = "out", run_dir;
    bool override_incline = false;
    int snapshot_stride = -1;
    unsigned seed = 0;

    auto* run = app.add_subcommand("run", "Run a survey scenario");
    run->add_option("--config", config, "Scenario config (TOML)")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--override-incline", override_incline,
                  "Run even when the incline audit fails");
    run->add_option("--snapshot-stride", snapshot_stride,
                    "Write a field snapshot every N steps (0 = end only)");
    run->add_option("--seed", seed, "RNG seed (reserved; runs are deterministic)");

    auto* validate = app.add_subcommand("validate", "Validate a scenario without running it");
    validate->add_option("--config", config, "Scenario config (TOML)")->required();
    validate->add_flag("--override-incline", override_incline,
                       "Demote incline-audit failures to warnings");

    auto* incline = app.add_subcommand("incline", "Print the incline-compatibility table");
    incline->add_option("--config", config, "Scenario config (TOML)")->required();

    auto* export_plots = app.add_subcommand("export-plots", "Export plot-ready CSV series");
    export_plots->add_option("--config", config, "Scenario config (TOML)")->required();
    export_plots->add_option("--run", run_dir, "Completed run directory")->required();
    export_plots->add_option("--out", out_dir, "Output directory");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config, out_dir, override_incline, snapshot_stride, seed);
    if (validate->parsed()) return cmd_validate(config, override_incline);
    if (incline->parsed()) return cmd_incline(config);
    if (export_plots->parsed()) return cmd_export(config, run_dir, out_dir);
    return kExitRuntime;
}
