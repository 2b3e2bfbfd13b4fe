#include "uavsearch/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "uavsearch/errors.hpp"
#include "uavsearch/guidance.hpp"
#include "uavsearch/mpc.hpp"
#include "uavsearch/sensing.hpp"

namespace uvs {

Scenario prepare_scenario(const ScenarioConfig& config) {
    Scenario s;
    s.config = config;

    TerrainMesh mesh = load_mesh(config.mesh_path);
    std::optional<DemRaster> dem;
    if (config.dem_path) dem = load_dem(*config.dem_path);
    s.terrain = std::make_shared<Terrain>(std::move(mesh), std::move(dem));
    s.fem = std::make_shared<FemSystem>(s.terrain->mesh());

    for (auto& entry : s.config.fleet) {
        if (entry.initial_z_relative) {
            entry.initial.z += s.terrain->elevation(entry.initial.position);
            entry.initial_z_relative = false;
        }
    }
    return s;
}

std::vector<Finding> validate_scenario(const Scenario& scenario) {
    std::vector<Finding> findings;
    auto error = [&](const std::string& msg) {
        findings.push_back({Finding::Severity::Error, msg});
    };
    auto warn = [&](const std::string& msg) {
        findings.push_back({Finding::Severity::Warning, msg});
    };

    const ScenarioConfig& cfg = scenario.config;
    if (!(cfg.dt > 0.0)) error("sim.dt must be positive");
    if (!(cfg.duration >= 0.0)) error("sim.duration must be non-negative");
    if (cfg.dt > 0.0 && cfg.duration > 0.0) {
        const double steps = cfg.duration / cfg.dt;
        if (std::abs(steps - std::round(steps)) > 1e-9)
            error("sim.duration must be a multiple of sim.dt");
    }
    if (cfg.fleet.empty()) error("fleet must contain at least one UAV");
    if (cfg.snapshot_stride < 0) error("snapshot stride must be non-negative");

    try {
        cfg.hedac.validate();
    } catch (const std::exception& e) {
        error(e.what());
    }

    for (const auto& entry : cfg.fleet) {
        try {
            entry.spec.validate();
        } catch (const std::exception& e) {
            error(e.what());
            continue;
        }
        // Lateral sensing scope must exceed the turning diameter, otherwise
        // the UAV can end up circling its area of interest forever.
        const double lateral = 2.0 * entry.spec.h_goal * std::tan(entry.spec.sensor.gamma1 / 2.0);
        if (lateral <= 2.0 * entry.spec.r_min)
            warn("UAV '" + entry.spec.name + "': lateral footprint at h_goal (" +
                 std::to_string(lateral) + " m) does not exceed twice the minimum turning radius (" +
                 std::to_string(2.0 * entry.spec.r_min) +
                 " m); expect degenerate circling around areas of interest");
    }
    if (!findings.empty() &&
        std::any_of(findings.begin(), findings.end(),
                    [](const Finding& f) { return f.severity == Finding::Severity::Error; }))
        return findings;

    const Terrain& terrain = *scenario.terrain;
    const TerrainMesh& mesh = terrain.mesh();

    std::vector<UAVSpec> specs;
    for (const auto& entry : cfg.fleet) specs.push_back(entry.spec);
    const InclineReport incline = incline_audit(mesh, specs);
    for (const auto& e : incline.entries) {
        if (!e.compatible) {
            const std::string msg =
                "UAV '" + e.uav_name + "' supports terrain incline up to " +
                std::to_string(rad_to_deg(e.kappa)) + " deg but the mesh reaches " +
                std::to_string(rad_to_deg(incline.kappa_terrain_max)) + " deg";
            if (cfg.override_incline)
                warn(msg + " (override in effect)");
            else
                error(msg);
        }
    }

    for (size_t i = 0; i < cfg.fleet.size(); ++i) {
        const auto& entry = cfg.fleet[i];
        const auto& st = entry.initial;
        const std::string who = "UAV '" + entry.spec.name + "'";
        if (!mesh.contains(st.position)) {
            error(who + " starts outside the search domain");
            continue;
        }
        const double h = st.z - terrain.elevation(st.position);
        if (h < entry.spec.h_min - 1e-9)
            error(who + " starts " + std::to_string(h) + " m above ground, below h_min");
        const double clear = mesh.boundary_distance(st.position, entry.spec.delta * 4 + 100.0);
        if (clear < entry.spec.delta)
            error(who + " starts closer than delta to the domain boundary");
        if (st.rho < entry.spec.rho_min() - 1e-12 || st.rho > 1.0 + 1e-12)
            error(who + " initial rho outside [rho_min, 1]");
        if (st.phi < entry.spec.phi_min - 1e-12 || st.phi > entry.spec.phi_max + 1e-12)
            error(who + " initial phi outside bounds");
        for (size_t j = i + 1; j < cfg.fleet.size(); ++j) {
            const auto& other = cfg.fleet[j];
            const double margin = std::max(entry.spec.delta, other.spec.delta);
            if ((st.position - other.initial.position).norm() < margin)
                error(who + " and UAV '" + other.spec.name + "' start closer than clearance");
        }
    }

    try {
        (void)init_probability(cfg.m0, *scenario.fem);
    } catch (const std::exception& e) {
        error(e.what());
    }
    return findings;
}

namespace {

struct UAVRuntime {
    const UAVSpec* spec;
    UAVState state;
    std::optional<PreviousVelocities> prev;
    EscapeSide escape_side = EscapeSide::Left;
};

UAVStepData snapshot(const UAVRuntime& rt) {
    const auto [v_s, v_z] = velocity_components_raw(rt.state.rho, rt.state.phi, *rt.spec);
    UAVStepData d;
    d.x = rt.state.position.x;
    d.y = rt.state.position.y;
    d.z = rt.state.z;
    d.theta = rt.state.theta;
    d.rho = rt.state.rho;
    d.phi = rt.state.phi;
    d.omega = rt.state.omega;
    d.v_s = v_s;
    d.v_z = v_z;
    return d;
}

}  // namespace

RunArtifacts run(const Scenario& scenario, const std::optional<std::string>& out_dir) {
    {
        const auto findings = validate_scenario(scenario);
        for (const auto& f : findings)
            if (f.severity == Finding::Severity::Error)
                throw ConfigError("scenario validation failed: " + f.message);
    }

    const ScenarioConfig& cfg = scenario.config;
    const Terrain& terrain = *scenario.terrain;
    const TerrainMesh& mesh = terrain.mesh();
    const FemSystem& fem = *scenario.fem;

    if (out_dir) std::filesystem::create_directories(*out_dir);

    HedacSolver solver(scenario.fem, cfg.hedac);
    ScalarField m0 = init_probability(cfg.m0, fem);
    ScalarField coverage(&mesh, 0.0);
    ScalarField m = undetected_probability(m0, coverage);

    std::vector<UAVRuntime> uavs;
    for (const auto& entry : cfg.fleet) {
        UAVRuntime rt;
        rt.spec = &entry.spec;
        rt.state = entry.initial;
        uavs.push_back(std::move(rt));
    }
    const int n = static_cast<int>(uavs.size());
    const int steps = static_cast<int>(std::round(cfg.duration / cfg.dt));

    RunArtifacts artifacts;
    artifacts.records.reserve(steps + 1);

    auto emit_record = [&](double t, double eta, double compute_s) {
        StepRecord rec;
        rec.t = t;
        rec.eta = eta;
        rec.compute_seconds = compute_s;
        for (const auto& rt : uavs) rec.uavs.push_back(snapshot(rt));
        artifacts.records.push_back(std::move(rec));
    };
    emit_record(0.0, survey_accomplishment(m, fem), 0.0);

    auto maybe_snapshot = [&](int step, bool final) {
        if (!out_dir) return;
        const bool strided = cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0;
        if (!strided && !final) return;
        char name[64];
        std::snprintf(name, sizeof(name), "field_m_%06d.csv", step);
        write_field_csv(m, *out_dir + "/" + (final ? "field_m_final.csv" : name));
    };

    for (int step = 1; step <= steps; ++step) {
        const auto t_begin = std::chrono::steady_clock::now();

        // (1) potential field from the current undetected probability
        const ScalarField u = solver.solve(m);

        // (2) gradient yaw rates, then centralized collision resolution
        std::vector<UAVState> states;
        std::vector<double> candidates;
        std::vector<const UAVSpec*> specs;
        for (const auto& rt : uavs) {
            states.push_back(rt.state);
            specs.push_back(rt.spec);
            candidates.push_back(desired_yaw_rate(rt.state, u, *rt.spec, cfg.dt));
        }
        const std::vector<ResolvedOmega> resolved =
            resolve_collisions(states, candidates, specs, mesh, cfg.dt);

        // (3) per-UAV MPC with escape validation
        for (int i = 0; i < n; ++i) {
            UAVRuntime& rt = uavs[i];
            if (resolved[i].escape_side) rt.escape_side = *resolved[i].escape_side;

            auto escape_from_now = [&]() {
                return escape_feasible(rt.state, *rt.spec, terrain, rt.escape_side, cfg.dt);
            };

            ControlDecision decision;
            if (!resolved[i].feasible) {
                // No collision-free yaw rate exists; start the recorded
                // escape maneuver immediately.
                decision = apply_or_escape(std::nullopt, std::nullopt, escape_from_now);
            } else {
                const PredictedPath path = build_predicted_path(rt.state, u, *rt.spec, terrain,
                                                                resolved[i].omega, cfg.dt);
                const auto optimized = optimize_regime(rt.state, path, *rt.spec, terrain, rt.prev);
                if (!optimized) {
                    decision = apply_or_escape(std::nullopt, std::nullopt, escape_from_now);
                } else {
                    UAVState next = rt.state;
                    next.rho = optimized->controls.rho;
                    next.phi = optimized->controls.phi;
                    next.omega = optimized->controls.omega;
                    next = step_state(next, *rt.spec, cfg.dt);
                    next.rho = optimized->controls.rho;
                    next.phi = optimized->controls.phi;
                    next.omega = optimized->controls.omega;
                    const EscapeResult at_next =
                        escape_feasible(next, *rt.spec, terrain, rt.escape_side, cfg.dt);
                    decision = apply_or_escape(optimized->controls, at_next, escape_from_now);
                }
            }
            if (decision.used_escape) ++artifacts.escape_activations;

            const auto [pv_s, pv_z] =
                velocity_components_raw(rt.state.rho, rt.state.phi, *rt.spec);
            rt.prev = PreviousVelocities{pv_s, pv_z};
            rt.state.rho = decision.controls.rho;
            rt.state.phi = decision.controls.phi;
            rt.state.omega = decision.controls.omega;
        }

        // (4) advance motion
        for (auto& rt : uavs) rt.state = step_state(rt.state, *rt.spec, cfg.dt);

        // (5) sensing and field updates
        for (const auto& rt : uavs) {
            const auto rates = sense_footprint(rt.state, rt.spec->sensor, terrain);
            accumulate_coverage(coverage, rates, cfg.dt);
        }
        m = undetected_probability(m0, coverage);
        const double eta = survey_accomplishment(m, fem);

        const auto t_end = std::chrono::steady_clock::now();
        const double compute_s = std::chrono::duration<double>(t_end - t_begin).count();

        // (6) record and output
        emit_record(step * cfg.dt, eta, compute_s);
        maybe_snapshot(step, step == steps);
    }

    artifacts.final_coverage = coverage;
    artifacts.final_m = m;

    if (out_dir) {
        write_trajectory_csv(artifacts.records, *out_dir + "/trajectory.csv");
        write_metrics_csv(artifacts.records, *out_dir + "/metrics.csv");
        if (steps == 0) maybe_snapshot(0, true);
    }
    return artifacts;
}

MetricsSummary metrics_summary(const RunArtifacts& artifacts, const Scenario& scenario) {
    if (artifacts.records.empty()) throw InternalError("metrics_summary needs at least one record");
    MetricsSummary s;
    s.escape_activations = artifacts.escape_activations;
    s.final_eta = artifacts.records.back().eta;
    s.min_pairwise_clearance = std::numeric_limits<double>::infinity();
    s.min_altitude_margin = std::numeric_limits<double>::infinity();

    double total = 0.0;
    int counted = 0;
    const auto& fleet = scenario.config.fleet;
    for (const auto& rec : artifacts.records) {
        s.eta_series.emplace_back(rec.t, rec.eta);
        if (rec.t > 0.0) {
            total += rec.compute_seconds;
            s.max_step_seconds = std::max(s.max_step_seconds, rec.compute_seconds);
            ++counted;
        }
        for (size_t i = 0; i < rec.uavs.size(); ++i) {
            const auto& u = rec.uavs[i];
            const double z_t = scenario.terrain->elevation({u.x, u.y});
            s.min_altitude_margin =
                std::min(s.min_altitude_margin, u.z - z_t - fleet[i].spec.h_min);
            for (size_t j = i + 1; j < rec.uavs.size(); ++j) {
                const auto& v = rec.uavs[j];
                const double margin = std::max(fleet[i].spec.delta, fleet[j].spec.delta);
                const double d = std::hypot(u.x - v.x, u.y - v.y) - margin;
                s.min_pairwise_clearance = std::min(s.min_pairwise_clearance, d);
            }
        }
    }
    s.mean_step_seconds = counted > 0 ? total / counted : 0.0;
    return s;
}

void write_trajectory_csv(const std::vector<StepRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write trajectory log: " + path);
    out << "t,uav_id,x,y,z,theta,rho,phi,omega,v_s,v_z\n";
    char buf[320];
    for (const auto& rec : records)
        for (size_t i = 0; i < rec.uavs.size(); ++i) {
            const auto& u = rec.uavs[i];
            std::snprintf(buf, sizeof(buf),
                          "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          rec.t, i, u.x, u.y, u.z, u.theta, u.rho, u.phi, u.omega, u.v_s, u.v_z);
            out << buf;
        }
}

void write_metrics_csv(const std::vector<StepRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write metrics log: " + path);
    out << "t,eta,step_compute_seconds\n";
    char buf[128];
    for (const auto& rec : records) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", rec.t, rec.eta,
                      rec.compute_seconds);
        out << buf;
    }
}

}  // namespace uvs
