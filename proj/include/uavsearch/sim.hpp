#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uavsearch/fields.hpp"
#include "uavsearch/motion.hpp"
#include "uavsearch/terrain.hpp"

namespace uvs {

struct FleetEntry {
    UAVSpec spec;
    UAVState initial;
    bool initial_z_relative = false;  // z given as height above terrain
};

struct ScenarioConfig {
    std::string mesh_path;
    std::optional<std::string> dem_path;
    HedacParams hedac;
    double dt = 1.0;
    double duration = 0.0;
    std::vector<FleetEntry> fleet;
    InitialDistribution m0 = UniformDistribution{};
    int snapshot_stride = 0;   // field snapshots every N steps; 0 = end of run only
    unsigned seed = 0;         // reserved, the pipeline is deterministic
    bool override_incline = false;
};

struct Finding {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string message;
};

// Loaded, cross-checked scenario ready to run.
struct Scenario {
    ScenarioConfig config;
    std::shared_ptr<Terrain> terrain;
    std::shared_ptr<FemSystem> fem;
};

// Load mesh and DEM and resolve relative initial altitudes. Throws on
// unreadable/invalid files.
Scenario prepare_scenario(const ScenarioConfig& config);

// Full validation: returns all findings (errors and warnings). The scenario
// runs only when no errors are present.
std::vector<Finding> validate_scenario(const Scenario& scenario);

struct UAVStepData {
    double x = 0, y = 0, z = 0, theta = 0;
    double rho = 0, phi = 0, omega = 0;
    double v_s = 0, v_z = 0;
};

struct StepRecord {
    double t = 0.0;
    std::vector<UAVStepData> uavs;
    double eta = 0.0;
    double compute_seconds = 0.0;
};

struct RunArtifacts {
    std::vector<StepRecord> records;
    int escape_activations = 0;
    ScalarField final_m;
    ScalarField final_coverage;
};

struct MetricsSummary {
    double final_eta = 0.0;
    double mean_step_seconds = 0.0;
    double max_step_seconds = 0.0;
    int escape_activations = 0;
    double min_pairwise_clearance = 0.0;   // min over pairs of dist - max(delta_i, delta_j)
    double min_altitude_margin = 0.0;      // min over records of z - z_T - h_min
    std::vector<std::pair<double, double>> eta_series;
};

// Execute the control loop for duration/dt steps. When `out_dir` is given,
// trajectory/metrics/field logs are written there.
RunArtifacts run(const Scenario& scenario, const std::optional<std::string>& out_dir);

MetricsSummary metrics_summary(const RunArtifacts& artifacts, const Scenario& scenario);

void write_trajectory_csv(const std::vector<StepRecord>& records, const std::string& path);
void write_metrics_csv(const std::vector<StepRecord>& records, const std::string& path);

}  // namespace uvs
