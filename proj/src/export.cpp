#include "uavsearch/export.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "uavsearch/config.hpp"
#include "uavsearch/errors.hpp"
#include "uavsearch/sim.hpp"

namespace uvs {

namespace {

struct TrajRow {
    double t, x, y, z, theta, rho, phi, omega, v_s, v_z;
    int uav_id;
};

std::vector<TrajRow> read_trajectory(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open trajectory log: " + path);
    std::vector<TrajRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line.rfind("t,", 0) == 0) continue;
        TrajRow r{};
        const int got = std::sscanf(line.c_str(), "%lf,%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf",
                                    &r.t, &r.uav_id, &r.x, &r.y, &r.z, &r.theta, &r.rho, &r.phi,
                                    &r.omega, &r.v_s, &r.v_z);
        if (got != 11)
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed trajectory row");
        rows.push_back(r);
    }
    if (rows.empty()) throw ConfigError(path + ": trajectory log holds no samples");
    return rows;
}

}  // namespace

void export_plots(const std::string& config_path, const std::string& run_dir,
                  const std::string& out_dir) {
    const ScenarioConfig config = load_scenario_config(config_path);
    const Scenario scenario = prepare_scenario(config);

    const auto rows = read_trajectory(run_dir + "/trajectory.csv");
    std::filesystem::create_directories(out_dir);

    int n_uavs = 0;
    for (const auto& r : rows) n_uavs = std::max(n_uavs, r.uav_id + 1);
    if (n_uavs != static_cast<int>(config.fleet.size()))
        throw ConfigError("trajectory log holds " + std::to_string(n_uavs) +
                          " UAVs but the config defines " + std::to_string(config.fleet.size()));

    char buf[256];
    for (int id = 0; id < n_uavs; ++id) {
        std::vector<TrajRow> series;
        for (const auto& r : rows)
            if (r.uav_id == id) series.push_back(r);

        const UAVSpec& spec = config.fleet[id].spec;
        std::ofstream controls(out_dir + "/uav" + std::to_string(id) + "_controls.csv");
        std::ofstream velocity(out_dir + "/uav" + std::to_string(id) + "_velocity.csv");
        std::ofstream accel(out_dir + "/uav" + std::to_string(id) + "_acceleration.csv");
        std::ofstream altitude(out_dir + "/uav" + std::to_string(id) + "_altitude.csv");
        if (!controls || !velocity || !accel || !altitude)
            throw ConfigError("cannot write plot files into " + out_dir);
        controls << "t,rho,phi,omega\n";
        velocity << "t,v_s,v_z\n";
        accel << "t,a_s,a_z\n";
        altitude << "t,z,z_T,h_min_band,h_goal_band\n";

        for (size_t k = 0; k < series.size(); ++k) {
            const auto& r = series[k];
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", r.t, r.rho, r.phi,
                          r.omega);
            controls << buf;
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", r.t, r.v_s, r.v_z);
            velocity << buf;

            // forward differences; the last sample repeats the previous slope
            const size_t k2 = k + 1 < series.size() ? k + 1 : k;
            const size_t k1 = k + 1 < series.size() ? k : k - (series.size() > 1 ? 1 : 0);
            const double dt = series[k2].t - series[k1].t;
            const double a_s = dt > 0 ? (series[k2].v_s - series[k1].v_s) / dt : 0.0;
            const double a_z = dt > 0 ? (series[k2].v_z - series[k1].v_z) / dt : 0.0;
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", r.t, a_s, a_z);
            accel << buf;

            const double z_t = scenario.terrain->elevation({r.x, r.y});
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.z, z_t,
                          z_t + spec.h_min, z_t + spec.h_goal);
            altitude << buf;
        }
    }

    // eta-vs-t straight from the metrics log
    std::ifstream metrics(run_dir + "/metrics.csv");
    if (!metrics) throw ConfigError("cannot open metrics log: " + run_dir + "/metrics.csv");
    std::ofstream eta(out_dir + "/eta.csv");
    eta << "t,eta\n";
    std::string line;
    while (std::getline(metrics, line)) {
        if (line.empty() || line.rfind("t,", 0) == 0) continue;
        double t, e, c;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &t, &e, &c) != 3)
            throw ParseError(run_dir + "/metrics.csv: malformed row");
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", t, e);
        eta << buf;
    }
}

}  // namespace uvs
