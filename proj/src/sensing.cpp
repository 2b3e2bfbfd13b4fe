#include "uavsearch/sensing.hpp"

#include <algorithm>
#include <cmath>

#include "uavsearch/errors.hpp"
#include "uavsearch/motion.hpp"
#include "uavsearch/terrain.hpp"

namespace uvs {

double SensingFunction::operator()(double distance) const {
    return k * std::exp(q * (b - distance) / s);
}

void SensorSpec::validate(const std::string& owner) const {
    auto require = [&](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("UAV '" + owner + "': " + what);
    };
    require(gamma1 > 0.0 && gamma1 < M_PI, "gamma1 must lie in (0, pi)");
    require(gamma2 > 0.0 && gamma2 < M_PI, "gamma2 must lie in (0, pi)");
    require(gamma.k > 0.0, "sensing function k must be positive");
    require(gamma.s > 0.0, "sensing function s must be positive");
    require(gamma.q > 0.0, "sensing function q must be positive");
}

Vec3 local_coords(const Vec3& uav_position, double theta, const Vec2& p, double z_T) {
    const Vec3 d = uav_position - Vec3{p.x, p.y, z_T};
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c * d.x - s * d.y, s * d.x + c * d.y, d.z};
}

bool in_fov(const Vec3& r, const SensorSpec& sensor) {
    if (r.z <= 0.0) return false;
    return std::abs(r.y) <= r.z * std::tan(sensor.gamma1 / 2.0) &&
           std::abs(r.x) <= r.z * std::tan(sensor.gamma2 / 2.0);
}

bool line_of_sight(const Vec3& uav_position, const Vec3& surface_point, const Terrain& terrain) {
    const Vec2 a = uav_position.xy();
    const Vec2 b = surface_point.xy();
    const double horizontal = (b - a).norm();
    const double step = terrain.los_step();
    if (horizontal <= step) return true;  // vertical or near-vertical ray, no interior probes
    const int n_probes = static_cast<int>(std::floor(horizontal / step));
    for (int i = 1; i <= n_probes; ++i) {
        const double f = i * step / horizontal;
        if (f >= 1.0) break;
        const Vec2 p = a + (b - a) * f;
        const double z_seg = uav_position.z + (surface_point.z - uav_position.z) * f;
        if (auto z_terr = terrain.los_elevation(p)) {
            if (z_seg <= *z_terr) return false;
        }
    }
    return true;
}

double detection_rate(const Vec3& r, const SensorSpec& sensor, bool visible) {
    if (!visible || !in_fov(r, sensor)) return 0.0;
    return sensor.gamma(r.norm());
}

std::vector<std::pair<int, double>> sense_footprint(const UAVState& state,
                                                    const SensorSpec& sensor,
                                                    const Terrain& terrain) {
    std::vector<std::pair<int, double>> rates;
    const auto& mesh = terrain.mesh();
    const Vec3 x{state.position.x, state.position.y, state.z};

    const double max_depth = state.z - mesh.min_elevation();
    if (max_depth <= 0.0) return rates;
    const double t1 = std::tan(sensor.gamma1 / 2.0);
    const double t2 = std::tan(sensor.gamma2 / 2.0);
    const double half = max_depth * std::max(t1, t2);

    static thread_local std::vector<int> candidates;
    mesh.nodes_in_box({state.position.x - half, state.position.y - half},
                      {state.position.x + half, state.position.y + half}, candidates);

    const Vec2 forward = heading_vector(state.theta);
    const Vec2 left = forward.perp_left();
    for (int i : candidates) {
        const auto& nd = mesh.nodes()[i];
        const double depth = state.z - nd.z;
        if (depth <= 0.0) continue;
        const Vec2 offset{nd.x - state.position.x, nd.y - state.position.y};
        const double along = offset.dot(forward);
        const double lateral = offset.dot(left);
        if (std::abs(lateral) > depth * t1 || std::abs(along) > depth * t2) continue;
        const Vec3 surf{nd.x, nd.y, nd.z};
        if (!line_of_sight(x, surf, terrain)) continue;
        const double d = std::sqrt(along * along + lateral * lateral + depth * depth);
        rates.emplace_back(i, sensor.gamma(d));
    }
    return rates;
}

}  // namespace uvs
