#pragma once

#include <string>

#include "uavsearch/geom.hpp"
#include "uavsearch/sensing.hpp"

namespace uvs {

enum class UAVType { MultiRotor, FixedWing };

// Immutable motion, sensing and control limits of one aircraft.
struct UAVSpec {
    std::string name;
    UAVType type = UAVType::MultiRotor;

    double v_s_max = 0.0;  // max horizontal speed, m/s
    double v_s_min = 0.0;  // min horizontal speed (fixed-wing > 0), m/s
    double v_z_max = 0.0;  // max ascent rate, m/s (>= 0)
    double v_z_min = 0.0;  // max descent rate, m/s (<= 0)
    double a_s_max = 0.0;  // m/s^2 (>= 0)
    double a_s_min = 0.0;  // m/s^2 (<= 0)
    double a_z_max = 0.0;  // m/s^2 (>= 0)
    double a_z_min = 0.0;  // m/s^2 (<= 0)
    double phi_min = 0.0;  // rad (< 0)
    double phi_max = 0.0;  // rad (> 0)
    double omega_lim = 0.0;  // rad/s technical yaw-rate limit
    double r_min = 0.0;    // minimum turning radius, m
    double delta = 0.0;    // minimum clearance distance, m
    double h_min = 0.0;    // minimum altitude above ground, m
    double h_goal = 0.0;   // goal search altitude above ground, m
    SensorSpec sensor;
    int n_pts = 20;        // prediction steps

    double rho_min() const { return v_s_max > 0.0 ? v_s_min / v_s_max : 0.0; }
    // Effective yaw-rate bound: min(omega_lim, v_s_max / R_min).
    double omega_max() const;

    // Throws ConfigError on any violated invariant.
    void validate() const;
};

// Time-varying pose and control state of one UAV.
struct UAVState {
    Vec2 position;         // x, y (m)
    double z = 0.0;        // absolute altitude (m)
    double theta = 0.0;    // heading (rad)
    double rho = 1.0;      // velocity intensity in [rho_min, 1]
    double phi = 0.0;      // incline angle (rad)
    double omega = 0.0;    // yaw rate (rad/s)
    double t = 0.0;        // clock (s)
};

// Limit velocity v(phi): asymmetric ellipse through v_s_max and the
// ascent/descent rates. Throws ConfigError when phi is out of bounds.
double limit_velocity(double phi, const UAVSpec& spec);

// As limit_velocity but without bound checks, for trial regimes that may
// overshoot the box before the velocity constraints reject them.
double limit_velocity_raw(double phi, const UAVSpec& spec);

// (v_s, v_z) = rho * v(phi) * (cos phi, sin phi); validates bounds.
std::pair<double, double> velocity_components(double rho, double phi, const UAVSpec& spec);

// Unchecked variant used by trial-trajectory evaluation.
std::pair<double, double> velocity_components_raw(double rho, double phi, const UAVSpec& spec);

// Advance one control step with zero-order-hold controls. The horizontal
// displacement follows the exact constant-turn-rate arc.
UAVState step_state(const UAVState& state, const UAVSpec& spec, double dt);

// Horizontal displacement of a constant-(v_s, omega) arc over dt starting at
// heading theta.
Vec2 arc_displacement(double v_s, double omega, double theta, double dt);

}  // namespace uvs
