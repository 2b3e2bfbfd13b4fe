#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uavsearch/fields.hpp"
#include "uavsearch/geom.hpp"
#include "uavsearch/guidance.hpp"
#include "uavsearch/motion.hpp"
#include "uavsearch/terrain.hpp"

namespace uvs {

// Horizontal path achievable at full speed (rho = 1, phi = 0) over the
// prediction window [0, tau_max], tau_max = n_pts * dt. Arc length is
// s(tau) = v_s_max * tau.
struct PredictedPath {
    double dt = 0.0;
    double tau_max = 0.0;
    double v_s_max = 0.0;
    std::vector<Vec2> xy;        // n_pts + 1 samples
    std::vector<double> theta;
    std::vector<double> omega;   // yaw rate at each sample (last repeats)

    double s_max() const { return v_s_max * tau_max; }
    Vec2 position_at_s(double s) const;
    double omega_at_s(double s) const;
};

// MPC optimization vector: rho and phi at tau_max/2 and tau_max.
struct RegimeVector {
    double rho1 = 1.0, rho2 = 1.0;
    double phi1 = 0.0, phi2 = 0.0;

    std::array<double, 4> as_array() const { return {rho1, rho2, phi1, phi2}; }
    static RegimeVector from_array(const std::array<double, 4>& a) {
        return {a[0], a[1], a[2], a[3]};
    }
};

// Known values of the trial control functions at tau = 0.
struct RegimeAnchors {
    double rho0 = 1.0;
    double phi0 = 0.0;
};

// Quadratic through (0, v0), (tau_max/2, v1), (tau_max, v2).
double quadratic_regime(double tau, double tau_max, double v0, double v1, double v2);

// rho and phi sampled on the path's tau grid; values are not clipped.
struct TrialRegime {
    std::vector<double> rho;
    std::vector<double> phi;
};
TrialRegime trial_regime(const RegimeVector& w, const RegimeAnchors& anchors, double tau_max,
                         int n_samples);

// Trial trajectory induced by a regime along the predicted path.
struct TrialTrajectory {
    std::vector<double> rho, phi;
    std::vector<double> v_s, v_z;    // Eq. 1-2 velocities
    std::vector<double> a_s, a_z;    // finite-difference accelerations
    std::vector<double> s;           // monotone, clamped to [0, s_max]
    std::vector<Vec2> xy;
    std::vector<double> z;
    std::vector<double> z_T;
    std::vector<double> omega;       // curvature-preserving scaled yaw rate
    bool clamped_at_path_end = false;
    double dt = 0.0;
    double tau_max = 0.0;
};

// Velocities realized at the previous control step; seeds the acceleration
// difference at tau = 0 so inter-step jumps are constrained too.
struct PreviousVelocities {
    double v_s = 0.0;
    double v_z = 0.0;
};

TrialTrajectory build_trial(const PredictedPath& path, const RegimeVector& w,
                            const RegimeAnchors& anchors, const UAVSpec& spec,
                            const Terrain& terrain, double z0,
                            const std::optional<PreviousVelocities>& prev = std::nullopt);

// o = o_v + o_h: velocity shortfall plus normalized goal-altitude deviation.
double objective(const TrialTrajectory& trial, const UAVSpec& spec);

// The nine normalized violation integrals (altitude, velocity and
// acceleration bounds); feasible iff every measure <= 1e-9.
struct ConstraintMeasures {
    double c_h = 0.0;
    double c_vs_min = 0.0, c_vs_max = 0.0;
    double c_vz_min = 0.0, c_vz_max = 0.0;
    double c_as_min = 0.0, c_as_max = 0.0;
    double c_az_min = 0.0, c_az_max = 0.0;

    static constexpr double kFeasibleEps = 1e-9;
    std::array<double, 9> as_array() const {
        return {c_h, c_vs_min, c_vs_max, c_vz_min, c_vz_max, c_as_min, c_as_max, c_az_min, c_az_max};
    }
    double max_violation() const;
    bool feasible() const { return max_violation() <= kFeasibleEps; }
};

ConstraintMeasures constraints(const TrialTrajectory& trial, const UAVSpec& spec);

// Multi-scale pattern search on a 4-box: axis moves at the current scale,
// best feasible improving move wins, scale halves when nothing improves.
// Stops at 30 iterations, 10 consecutive stalled iterations, or f <= 1e-3.
struct MsgsSettings {
    int max_iterations = 30;
    int max_stalled = 10;
    double target_fitness = 1e-3;
};
struct MsgsResult {
    std::array<double, 4> w;
    double f = 0.0;
    int iterations = 0;
    std::array<double, 4> final_scale{};
};
MsgsResult msgs_minimize(const std::function<double(const std::array<double, 4>&)>& f,
                         const std::function<bool(const std::array<double, 4>&)>& feasible,
                         const std::array<double, 4>& w0, const std::array<double, 4>& lo,
                         const std::array<double, 4>& hi, const MsgsSettings& settings = {});

struct Controls {
    double rho = 1.0;
    double phi = 0.0;
    double omega = 0.0;
};

struct OptimizedRegime {
    RegimeVector w;
    TrialTrajectory trial;
    Controls controls;  // trial functions evaluated at tau = dt
    double objective_value = 0.0;
};

// Seeds the pattern search with the first feasible of the three standard
// initial vectors (entries are normalized box coordinates); nullopt when none
// is feasible and the escape maneuver must take over.
std::optional<OptimizedRegime> optimize_regime(const UAVState& state, const PredictedPath& path,
                                               const UAVSpec& spec, const Terrain& terrain,
                                               const std::optional<PreviousVelocities>& prev);

// Full-speed path prediction along the frozen potential field. The first
// step applies `first_omega` (the collision-resolved yaw rate); later steps
// follow the gradient, and every step steers to keep boundary clearance.
PredictedPath build_predicted_path(const UAVState& state, const ScalarField& u,
                                   const UAVSpec& spec, const Terrain& terrain,
                                   double first_omega, double dt);

// Escape maneuver: decelerate toward rho_min and climb toward phi_max at the
// most agile feasible rates while turning on a circle of radius R_min.
struct EscapeResult {
    bool feasible = false;
    Controls first;        // controls of the maneuver's first step
    int steps = 0;
    double swept_angle = 0.0;
    double min_altitude_margin = 0.0;  // min of z - z_T - h_min along the maneuver
};

EscapeResult escape_feasible(const UAVState& start, const UAVSpec& spec, const Terrain& terrain,
                             EscapeSide side, double dt);

// MPC acceptance rule: optimal controls are applied only when an escape
// maneuver from the resulting state stays feasible; otherwise the UAV starts
// the escape maneuver validated from the current state.
struct ControlDecision {
    Controls controls;
    bool used_escape = false;
    bool escape_unavailable = false;  // even the immediate escape failed validation
};

ControlDecision apply_or_escape(const std::optional<Controls>& optimal,
                                const std::optional<EscapeResult>& escape_at_next,
                                const std::function<EscapeResult()>& escape_from_now);

}  // namespace uvs
