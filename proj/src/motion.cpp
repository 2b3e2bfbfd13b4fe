#include "uavsearch/motion.hpp"

#include <algorithm>
#include <cmath>

#include "uavsearch/errors.hpp"

namespace uvs {

double UAVSpec::omega_max() const {
    return r_min > 0.0 ? std::min(omega_lim, v_s_max / r_min) : omega_lim;
}

void UAVSpec::validate() const {
    auto require = [&](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("UAV '" + name + "': " + what);
    };
    require(v_s_max > 0.0, "v_s_max must be positive");
    require(v_s_min >= 0.0, "v_s_min must be non-negative");
    require(v_s_min < v_s_max, "v_s_min must be below v_s_max");
    require(v_z_max > 0.0, "v_z_max must be positive");
    require(v_z_min < 0.0, "v_z_min must be negative");
    require(a_s_max > 0.0 && a_s_min < 0.0, "horizontal acceleration band must straddle 0");
    require(a_z_max > 0.0 && a_z_min < 0.0, "vertical acceleration band must straddle 0");
    require(phi_min < 0.0 && phi_max > 0.0, "incline bounds must straddle 0");
    if (type == UAVType::MultiRotor) {
        require(std::abs(phi_min + M_PI / 2) < 1e-9 && std::abs(phi_max - M_PI / 2) < 1e-9,
                "multi-rotor incline limits must be -90/+90 deg");
        require(v_s_min == 0.0, "multi-rotor v_s_min must be 0");
    } else {
        require(std::abs(phi_min) <= 0.25 + 1e-12 && std::abs(phi_max) <= 0.25 + 1e-12,
                "fixed-wing incline limits must lie within +-0.25 rad");
        require(v_s_min > 0.0, "fixed-wing v_s_min must be positive");
    }
    require(r_min > 0.0, "R_min must be positive");
    require(delta > 0.0, "clearance delta must be positive");
    require(h_min > 0.0, "h_min must be positive");
    require(h_min < h_goal, "h_min must be below h_goal");
    require(omega_lim > 0.0, "omega_lim must be positive");
    require(n_pts >= 2, "n_pts must be at least 2");
    sensor.validate(name);
}

double limit_velocity_raw(double phi, const UAVSpec& spec) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double v_c = phi >= 0.0 ? spec.v_z_max : -spec.v_z_min;
    return 1.0 / std::sqrt(c * c / (spec.v_s_max * spec.v_s_max) + s * s / (v_c * v_c));
}

double limit_velocity(double phi, const UAVSpec& spec) {
    if (phi < spec.phi_min - 1e-12 || phi > spec.phi_max + 1e-12)
        throw ConfigError("UAV '" + spec.name + "': incline " + std::to_string(phi) +
                          " outside [phi_min, phi_max]");
    return limit_velocity_raw(phi, spec);
}

std::pair<double, double> velocity_components_raw(double rho, double phi, const UAVSpec& spec) {
    const double v = limit_velocity_raw(phi, spec);
    return {rho * v * std::cos(phi), rho * v * std::sin(phi)};
}

std::pair<double, double> velocity_components(double rho, double phi, const UAVSpec& spec) {
    if (rho < spec.rho_min() - 1e-12 || rho > 1.0 + 1e-12)
        throw ConfigError("UAV '" + spec.name + "': rho " + std::to_string(rho) +
                          " outside [rho_min, 1]");
    const double v = limit_velocity(phi, spec);
    return {rho * v * std::cos(phi), rho * v * std::sin(phi)};
}

Vec2 arc_displacement(double v_s, double omega, double theta, double dt) {
    if (std::abs(omega) < 1e-9) {
        return {v_s * std::cos(theta) * dt, v_s * std::sin(theta) * dt};
    }
    const double r = v_s / omega;
    const double theta1 = theta + omega * dt;
    return {r * (std::sin(theta1) - std::sin(theta)), r * (std::cos(theta) - std::cos(theta1))};
}

UAVState step_state(const UAVState& state, const UAVSpec& spec, double dt) {
    const auto [v_s, v_z] = velocity_components_raw(state.rho, state.phi, spec);
    UAVState next = state;
    next.position += arc_displacement(v_s, state.omega, state.theta, dt);
    next.theta = state.theta + state.omega * dt;
    next.z = state.z + v_z * dt;
    next.t = state.t + dt;
    return next;
}

}  // namespace uvs
