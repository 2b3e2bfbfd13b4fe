#include "uavsearch/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uvs {

double clamp_omega(double omega, const UAVSpec& spec) {
    const double w = spec.omega_max();
    return std::clamp(omega, -w, w);
}

double desired_yaw_rate(const UAVState& state, const ScalarField& u, const UAVSpec& spec,
                        double dt) {
    const Vec2 heading = heading_vector(state.theta);
    const Vec2 grad = gradient_direction(u, state.position, heading);
    const double cosang = std::clamp(heading.dot(grad), -1.0, 1.0);
    if (cosang >= 1.0) return 0.0;
    const double magnitude = std::acos(cosang) / dt;
    const double cross = heading.cross(grad);
    const double sign = cross > 0.0 ? 1.0 : (cross < 0.0 ? -1.0 : 1.0);
    return clamp_omega(sign * magnitude, spec);
}

AvoidanceGeometry build_avoidance_geometry(const UAVState& state, double omega_candidate,
                                           const UAVSpec& spec, double dt) {
    // The position reached after dt is linear in v_s, so the clearing-circle
    // centers for all speeds lie on a segment; the midpoint speed gives the
    // bounding-circle center.
    const double theta1 = state.theta + omega_candidate * dt;
    const Vec2 left_normal = heading_vector(theta1).perp_left();

    auto tangent_point = [&](double v_s) {
        return state.position + arc_displacement(v_s, omega_candidate, state.theta, dt);
    };
    const Vec2 p_full = tangent_point(spec.v_s_max);
    const Vec2 p_half = tangent_point(spec.v_s_max / 2.0);
    const double spread = (p_full - state.position).norm();  // tangent point for v_s = 0 is the position

    AvoidanceGeometry g;
    g.clearing_left = {p_full + left_normal * spec.r_min, spec.r_min};
    g.clearing_right = {p_full - left_normal * spec.r_min, spec.r_min};
    g.bounding_left = {p_half + left_normal * spec.r_min, spec.r_min + spread / 2.0};
    g.bounding_right = {p_half - left_normal * spec.r_min, spec.r_min + spread / 2.0};
    return g;
}

namespace {

double circle_clearance(const Circle& a, const Circle& b) {
    return (a.center - b.center).norm() - a.radius - b.radius;
}

}  // namespace

double pairwise_clearance(const AvoidanceGeometry& a, const AvoidanceGeometry& b) {
    double best = std::numeric_limits<double>::infinity();
    for (const Circle* ca : {&a.bounding_left, &a.bounding_right})
        for (const Circle* cb : {&b.bounding_left, &b.bounding_right})
            best = std::min(best, circle_clearance(*ca, *cb));
    return best;
}

double boundary_clearance(const AvoidanceGeometry& g, const TerrainMesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const Circle* c : {&g.bounding_left, &g.bounding_right}) {
        const double query = c->radius * 4.0 + 1000.0;
        const double d = mesh.boundary_distance(c->center, query);
        best = std::min(best, d - c->radius);
    }
    return best;
}

namespace {

struct SweepContext {
    const std::vector<UAVState>& states;
    const std::vector<const UAVSpec*>& specs;
    const TerrainMesh& mesh;
    double dt;

    bool clears(int i, const AvoidanceGeometry& gi,
                const std::vector<AvoidanceGeometry>& geoms) const {
        if (boundary_clearance(gi, mesh) < specs[i]->delta) return false;
        for (size_t j = 0; j < geoms.size(); ++j) {
            if (static_cast<int>(j) == i) continue;
            const double margin = std::max(specs[i]->delta, specs[j]->delta);
            if (pairwise_clearance(gi, geoms[j]) < margin) return false;
        }
        return true;
    }
};

}  // namespace

std::vector<ResolvedOmega> resolve_collisions(const std::vector<UAVState>& states,
                                              const std::vector<double>& candidate_omegas,
                                              const std::vector<const UAVSpec*>& specs,
                                              const TerrainMesh& mesh, double dt) {
    const int n = static_cast<int>(states.size());
    std::vector<AvoidanceGeometry> geoms(n);
    for (int i = 0; i < n; ++i)
        geoms[i] = build_avoidance_geometry(states[i], candidate_omegas[i], *specs[i], dt);

    SweepContext ctx{states, specs, mesh, dt};

    std::vector<ResolvedOmega> out(n);
    for (int i = 0; i < n; ++i) out[i].omega = candidate_omegas[i];

    bool any_conflict = false;
    for (int i = 0; i < n && !any_conflict; ++i)
        if (!ctx.clears(i, geoms[i], geoms)) any_conflict = true;

    if (any_conflict) {
        // Greedy sweep in UAV-index order: earlier UAVs hold their final
        // geometry, later ones still their candidates.
        for (int i = 0; i < n; ++i) {
            const double w_max = specs[i]->omega_max();
            const double cand = candidate_omegas[i];

            // Grid values ordered by |omega - candidate|; ties prefer the
            // counterclockwise side. The candidate itself is tried first.
            std::vector<double> trial_values;
            trial_values.push_back(cand);
            std::vector<double> grid(41);
            for (int k = 0; k < 41; ++k) grid[k] = -w_max + k * (2.0 * w_max / 40.0);
            std::stable_sort(grid.begin(), grid.end(), [&](double a, double b) {
                const double da = std::abs(a - cand), db = std::abs(b - cand);
                if (da != db) return da < db;
                return a > b;
            });
            trial_values.insert(trial_values.end(), grid.begin(), grid.end());

            bool found = false;
            for (double w : trial_values) {
                const AvoidanceGeometry g = build_avoidance_geometry(states[i], w, *specs[i], dt);
                if (ctx.clears(i, g, geoms)) {
                    out[i].omega = w;
                    geoms[i] = g;
                    found = true;
                    break;
                }
            }
            if (!found) {
                out[i].omega = cand;
                out[i].feasible = false;
            }
        }
    }

    // Escape side: the +-omega_max bound nearer the final omega whose bounding
    // circle stays collision-free.
    for (int i = 0; i < n; ++i) {
        const double w_max = specs[i]->omega_max();
        const bool prefer_left = out[i].omega >= 0.0;
        const EscapeSide order[2] = {prefer_left ? EscapeSide::Left : EscapeSide::Right,
                                     prefer_left ? EscapeSide::Right : EscapeSide::Left};
        for (EscapeSide side : order) {
            const Circle& b = side == EscapeSide::Left ? geoms[i].bounding_left
                                                       : geoms[i].bounding_right;
            bool clear = mesh.boundary_distance(b.center, b.radius * 4.0 + 1000.0) - b.radius >=
                         specs[i]->delta;
            for (int j = 0; j < n && clear; ++j) {
                if (j == i) continue;
                const double margin = std::max(specs[i]->delta, specs[j]->delta);
                for (const Circle* cb : {&geoms[j].bounding_left, &geoms[j].bounding_right})
                    if ((b.center - cb->center).norm() - b.radius - cb->radius < margin)
                        clear = false;
            }
            if (clear) {
                out[i].escape_side = side;
                out[i].omega_esc = side == EscapeSide::Left ? w_max : -w_max;
                break;
            }
        }
    }
    return out;
}

}  // namespace uvs
