/* C API for the uavsearch multi-UAV terrain-survey simulator.
 *
 * All functions return a uvs_status; on failure uvs_last_error() yields a
 * human-readable message for the calling thread. Strings returned through
 * out-parameters are heap-allocated and must be released with
 * uvs_string_free().
 */
#ifndef UAVSEARCH_H
#define UAVSEARCH_H

#include <stddef.h>

#ifndef UVS_API
#define UVS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uvs_status {
    UVS_OK = 0,
    UVS_ERR_ARGUMENT = 1,   /* null pointer / bad argument */
    UVS_ERR_VALIDATION = 2, /* config or scenario fails validation */
    UVS_ERR_RUNTIME = 3,    /* failure while running or exporting */
    UVS_ERR_IO = 4          /* unreadable or malformed input file */
} uvs_status;

/* Opaque scenario handle: parsed config plus loaded terrain. */
typedef struct uvs_scenario uvs_scenario;

/* Last error message of the calling thread (empty string when none). */
UVS_API const char* uvs_last_error(void);

UVS_API void uvs_string_free(char* s);

/* Parse a scenario config (TOML) and load its mesh/DEM. */
UVS_API uvs_status uvs_scenario_open(const char* config_path, uvs_scenario** out);
UVS_API void uvs_scenario_close(uvs_scenario* scenario);

/* Toggle the incline-audit override before validating or running. */
UVS_API uvs_status uvs_scenario_set_override_incline(uvs_scenario* scenario, int enabled);
/* Field snapshots every `stride` steps (0 = end of run only). */
UVS_API uvs_status uvs_scenario_set_snapshot_stride(uvs_scenario* scenario, int stride);
UVS_API uvs_status uvs_scenario_set_seed(uvs_scenario* scenario, unsigned seed);

/* Full validation. `report` (optional) receives one finding per line;
 * `error_count` / `warning_count` (optional) receive the totals. Returns
 * UVS_OK even when findings exist -- inspect error_count.
 */
UVS_API uvs_status uvs_scenario_validate(uvs_scenario* scenario, char** report,
                                         int* error_count, int* warning_count);

/* Incline-compatibility table (UAV kappa vs terrain kappa_T_max). */
UVS_API uvs_status uvs_scenario_incline_table(uvs_scenario* scenario, char** table,
                                              int* all_compatible);

typedef struct uvs_run_summary {
    double final_eta;
    double mean_step_seconds;
    double max_step_seconds;
    int steps;
    int escape_activations;
    double min_pairwise_clearance;
    double min_altitude_margin;
} uvs_run_summary;

/* Run the scenario, writing trajectory.csv / metrics.csv / field snapshots
 * into out_dir. `summary` is optional.
 */
UVS_API uvs_status uvs_scenario_run(uvs_scenario* scenario, const char* out_dir,
                                    uvs_run_summary* summary);

/* Convert a completed run directory into plot-ready CSV series. */
UVS_API uvs_status uvs_export_plots(const char* config_path, const char* run_dir,
                                    const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* UAVSEARCH_H */
