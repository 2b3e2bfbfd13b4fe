#include "uavsearch.h"

#include <cstring>
#include <sstream>
#include <string>

#include "uavsearch/config.hpp"
#include "uavsearch/errors.hpp"
#include "uavsearch/export.hpp"
#include "uavsearch/sim.hpp"

struct uvs_scenario {
    uvs::ScenarioConfig config;
    uvs::Scenario prepared;
};

namespace {

thread_local std::string g_last_error;

uvs_status fail(uvs_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

uvs_status map_exception() {
    try {
        throw;
    } catch (const uvs::ParseError& e) {
        return fail(UVS_ERR_IO, e.what());
    } catch (const uvs::ValidationError& e) {
        return fail(UVS_ERR_VALIDATION, e.what());
    } catch (const uvs::ConfigError& e) {
        return fail(UVS_ERR_VALIDATION, e.what());
    } catch (const uvs::DomainError& e) {
        return fail(UVS_ERR_RUNTIME, e.what());
    } catch (const std::exception& e) {
        return fail(UVS_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(UVS_ERR_RUNTIME, "unknown error");
    }
}

}  // namespace

extern "C" {

const char* uvs_last_error(void) { return g_last_error.c_str(); }

void uvs_string_free(char* s) { delete[] s; }

uvs_status uvs_scenario_open(const char* config_path, uvs_scenario** out) {
    if (!config_path || !out) return fail(UVS_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    try {
        auto scenario = std::make_unique<uvs_scenario>();
        scenario->config = uvs::load_scenario_config(config_path);
        scenario->prepared = uvs::prepare_scenario(scenario->config);
        *out = scenario.release();
        g_last_error.clear();
        return UVS_OK;
    } catch (...) {
        return map_exception();
    }
}

void uvs_scenario_close(uvs_scenario* scenario) { delete scenario; }

uvs_status uvs_scenario_set_override_incline(uvs_scenario* scenario, int enabled) {
    if (!scenario) return fail(UVS_ERR_ARGUMENT, "null scenario");
    scenario->prepared.config.override_incline = enabled != 0;
    return UVS_OK;
}

uvs_status uvs_scenario_set_snapshot_stride(uvs_scenario* scenario, int stride) {
    if (!scenario) return fail(UVS_ERR_ARGUMENT, "null scenario");
    if (stride < 0) return fail(UVS_ERR_ARGUMENT, "snapshot stride must be non-negative");
    scenario->prepared.config.snapshot_stride = stride;
    return UVS_OK;
}

uvs_status uvs_scenario_set_seed(uvs_scenario* scenario, unsigned seed) {
    if (!scenario) return fail(UVS_ERR_ARGUMENT, "null scenario");
    scenario->prepared.config.seed = seed;
    return UVS_OK;
}

uvs_status uvs_scenario_validate(uvs_scenario* scenario, char** report, int* error_count,
                                 int* warning_count) {
    if (!scenario) return fail(UVS_ERR_ARGUMENT, "null scenario");
    try {
        const auto findings = uvs::validate_scenario(scenario->prepared);
        int errors = 0, warnings = 0;
        std::ostringstream ss;
        for (const auto& f : findings) {
            const bool is_error = f.severity == uvs::Finding::Severity::Error;
            (is_error ? errors : warnings) += 1;
            ss << (is_error ? "error: " : "warning: ") << f.message << "\n";
        }
        if (report) *report = copy_string(ss.str());
        if (error_count) *error_count = errors;
        if (warning_count) *warning_count = warnings;
        g_last_error.clear();
        return UVS_OK;
    } catch (...) {
        return map_exception();
    }
}

uvs_status uvs_scenario_incline_table(uvs_scenario* scenario, char** table,
                                      int* all_compatible) {
    if (!scenario) return fail(UVS_ERR_ARGUMENT, "null scenario");
    try {
        std::vector<uvs::UAVSpec> specs;
        for (const auto& entry : scenario->prepared.config.fleet) specs.push_back(entry.spec);
        const auto report = uvs::incline_audit(scenario->prepared.terrain->mesh(), specs);

        char line[160];
        std::ostringstream ss;
        ss << "UAV                      supported incline [deg]   compatible\n";
        bool all_ok = true;
        for (const auto& e : report.entries) {
            std::snprintf(line, sizeof(line), "%-24s %24.1f   %s\n", e.uav_name.c_str(),
                          uvs::rad_to_deg(e.kappa), e.compatible ? "yes" : "NO");
            ss << line;
            all_ok = all_ok && e.compatible;
        }
        std::snprintf(line, sizeof(line), "terrain max incline [deg]: %.1f\n",
                      uvs::rad_to_deg(report.kappa_terrain_max));
        ss << line;
        if (table) *table = copy_string(ss.str());
        if (all_compatible) *all_compatible = all_ok ? 1 : 0;
        g_last_error.clear();
        return UVS_OK;
    } catch (...) {
        return map_exception();
    }
}

uvs_status uvs_scenario_run(uvs_scenario* scenario, const char* out_dir,
                            uvs_run_summary* summary) {
    if (!scenario || !out_dir) return fail(UVS_ERR_ARGUMENT, "null argument");
    try {
        const auto artifacts = uvs::run(scenario->prepared, std::string(out_dir));
        if (summary) {
            const auto s = uvs::metrics_summary(artifacts, scenario->prepared);
            summary->final_eta = s.final_eta;
            summary->mean_step_seconds = s.mean_step_seconds;
            summary->max_step_seconds = s.max_step_seconds;
            summary->steps = static_cast<int>(artifacts.records.size()) - 1;
            summary->escape_activations = s.escape_activations;
            summary->min_pairwise_clearance = s.min_pairwise_clearance;
            summary->min_altitude_margin = s.min_altitude_margin;
        }
        g_last_error.clear();
        return UVS_OK;
    } catch (...) {
        return map_exception();
    }
}

uvs_status uvs_export_plots(const char* config_path, const char* run_dir, const char* out_dir) {
    if (!config_path || !run_dir || !out_dir) return fail(UVS_ERR_ARGUMENT, "null argument");
    try {
        uvs::export_plots(config_path, run_dir, out_dir);
        g_last_error.clear();
        return UVS_OK;
    } catch (...) {
        return map_exception();
    }
}

}  // extern "C"
