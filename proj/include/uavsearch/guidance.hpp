#pragma once

#include <optional>
#include <vector>

#include "uavsearch/fields.hpp"
#include "uavsearch/geom.hpp"
#include "uavsearch/motion.hpp"

namespace uvs {

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

// Turn-geometry circles used for pairwise and boundary collision checks.
// The bounding circle of a side contains the clearing circles of every
// horizontal speed in [0, v_s_max]; the extremes are internally tangent.
struct AvoidanceGeometry {
    Circle clearing_left, clearing_right;    // for v_s = v_s_max
    Circle bounding_left, bounding_right;    // B+ and B-
};

enum class EscapeSide { Left, Right };

struct ResolvedOmega {
    double omega = 0.0;            // final yaw rate for this step
    bool feasible = true;          // false: no collision-free grid value exists
    std::optional<EscapeSide> escape_side;
    double omega_esc = 0.0;        // +-omega_max on the recorded side
};

// Yaw rate steering the heading onto the potential gradient:
// |omega| = arccos(heading . grad)/dt, sign from the heading x gradient cross
// product (exact antiparallel ties break to +), clamped to omega_max.
double desired_yaw_rate(const UAVState& state, const ScalarField& u, const UAVSpec& spec,
                        double dt);

// Clip to [-omega_max, omega_max] with omega_max = min(omega_lim, v_s_max/R_min).
double clamp_omega(double omega, const UAVSpec& spec);

// Clearing circles (radius R_min, tangent at the position reached after dt at
// v_s_max under omega) and the bounding circles that contain the clearing
// circles of every speed in [0, v_s_max].
AvoidanceGeometry build_avoidance_geometry(const UAVState& state, double omega_candidate,
                                           const UAVSpec& spec, double dt);

// Centralized collision resolution for one control step. Pairwise, both
// bounding circles of each UAV must keep boundary-to-boundary distance
// >= max(delta_i, delta_j) from both circles of every other UAV, and every
// circle must clear the domain boundary (outer and holes) by delta. When the
// initial candidates conflict, each UAV in index order picks the feasible
// value nearest its candidate from a 41-point grid on [-omega_max, omega_max].
std::vector<ResolvedOmega> resolve_collisions(const std::vector<UAVState>& states,
                                              const std::vector<double>& candidate_omegas,
                                              const std::vector<const UAVSpec*>& specs,
                                              const TerrainMesh& mesh, double dt);

// Minimum boundary-to-boundary clearance between the bounding circles of two
// geometries (negative when they interpenetrate the required margin).
double pairwise_clearance(const AvoidanceGeometry& a, const AvoidanceGeometry& b);

// Minimum clearance between both bounding circles and the domain boundary.
double boundary_clearance(const AvoidanceGeometry& g, const TerrainMesh& mesh);

}  // namespace uvs
