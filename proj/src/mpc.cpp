#include "uavsearch/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "uavsearch/errors.hpp"

namespace uvs {

Vec2 PredictedPath::position_at_s(double s) const {
    const double ds = v_s_max * dt;
    const int n = static_cast<int>(xy.size()) - 1;
    const double f = std::clamp(s / ds, 0.0, static_cast<double>(n));
    const int k = std::min(static_cast<int>(f), n - 1);
    const double w = f - k;
    return xy[k] * (1.0 - w) + xy[k + 1] * w;
}

double PredictedPath::omega_at_s(double s) const {
    const double ds = v_s_max * dt;
    const int n = static_cast<int>(omega.size()) - 1;
    const double f = std::clamp(s / ds, 0.0, static_cast<double>(n));
    const int k = std::min(static_cast<int>(f), n - 1);
    const double w = f - k;
    return omega[k] * (1.0 - w) + omega[k + 1] * w;
}

double quadratic_regime(double tau, double tau_max, double v0, double v1, double v2) {
    const double t1 = tau_max / 2.0;
    const double t2 = tau_max;
    const double l0 = (tau - t1) * (tau - t2) / (t1 * t2);
    const double l1 = tau * (tau - t2) / (t1 * (t1 - t2));
    const double l2 = tau * (tau - t1) / (t2 * (t2 - t1));
    return l0 * v0 + l1 * v1 + l2 * v2;
}

TrialRegime trial_regime(const RegimeVector& w, const RegimeAnchors& anchors, double tau_max,
                         int n_samples) {
    TrialRegime r;
    r.rho.resize(n_samples);
    r.phi.resize(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        const double tau = tau_max * k / (n_samples - 1);
        r.rho[k] = quadratic_regime(tau, tau_max, anchors.rho0, w.rho1, w.rho2);
        r.phi[k] = quadratic_regime(tau, tau_max, anchors.phi0, w.phi1, w.phi2);
    }
    return r;
}

TrialTrajectory build_trial(const PredictedPath& path, const RegimeVector& w,
                            const RegimeAnchors& anchors, const UAVSpec& spec,
                            const Terrain& terrain, double z0,
                            const std::optional<PreviousVelocities>& prev) {
    const int n = static_cast<int>(path.xy.size());
    TrialTrajectory trial;
    trial.dt = path.dt;
    trial.tau_max = path.tau_max;

    const TrialRegime regime = trial_regime(w, anchors, path.tau_max, n);
    trial.rho = regime.rho;
    trial.phi = regime.phi;

    trial.v_s.resize(n);
    trial.v_z.resize(n);
    for (int k = 0; k < n; ++k) {
        const auto [vs, vz] = velocity_components_raw(trial.rho[k], trial.phi[k], spec);
        trial.v_s[k] = vs;
        trial.v_z[k] = vz;
    }

    // Arc length by trapezoidal quadrature, kept monotone and clamped at the
    // end of the predicted path.
    trial.s.resize(n);
    trial.z.resize(n);
    trial.s[0] = 0.0;
    trial.z[0] = z0;
    const double s_cap = path.s_max();
    double raw_s = 0.0;
    for (int k = 1; k < n; ++k) {
        raw_s += 0.5 * (trial.v_s[k - 1] + trial.v_s[k]) * path.dt;
        if (raw_s > s_cap) trial.clamped_at_path_end = true;
        trial.s[k] = std::clamp(std::max(raw_s, trial.s[k - 1]), 0.0, s_cap);
        trial.z[k] = trial.z[k - 1] + 0.5 * (trial.v_z[k - 1] + trial.v_z[k]) * path.dt;
    }

    trial.xy.resize(n);
    trial.z_T.resize(n);
    trial.omega.resize(n);
    for (int k = 0; k < n; ++k) {
        trial.xy[k] = path.position_at_s(trial.s[k]);
        trial.z_T[k] = terrain.elevation(trial.xy[k]);
        trial.omega[k] = trial.v_s[k] / path.v_s_max * path.omega_at_s(trial.s[k]);
    }

    trial.a_s.resize(n);
    trial.a_z.resize(n);
    const double dt = path.dt;
    for (int k = 1; k < n - 1; ++k) {
        trial.a_s[k] = (trial.v_s[k + 1] - trial.v_s[k - 1]) / (2.0 * dt);
        trial.a_z[k] = (trial.v_z[k + 1] - trial.v_z[k - 1]) / (2.0 * dt);
    }
    if (prev) {
        trial.a_s[0] = (trial.v_s[1] - prev->v_s) / (2.0 * dt);
        trial.a_z[0] = (trial.v_z[1] - prev->v_z) / (2.0 * dt);
    } else {
        trial.a_s[0] = (trial.v_s[1] - trial.v_s[0]) / dt;
        trial.a_z[0] = (trial.v_z[1] - trial.v_z[0]) / dt;
    }
    trial.a_s[n - 1] = (trial.v_s[n - 1] - trial.v_s[n - 2]) / dt;
    trial.a_z[n - 1] = (trial.v_z[n - 1] - trial.v_z[n - 2]) / dt;
    return trial;
}

namespace {

// Trapezoid rule over the uniform tau grid.
double trapezoid(const std::vector<double>& f, double dt) {
    double acc = 0.5 * (f.front() + f.back());
    for (size_t k = 1; k + 1 < f.size(); ++k) acc += f[k];
    return acc * dt;
}

double violation_integral(const std::vector<double>& values, double dt, double norm,
                          const std::function<double(double)>& breach) {
    std::vector<double> integrand(values.size());
    for (size_t k = 0; k < values.size(); ++k) integrand[k] = std::max(breach(values[k]), 0.0);
    return trapezoid(integrand, dt) / norm;
}

}  // namespace

double objective(const TrialTrajectory& trial, const UAVSpec& spec) {
    const double o_v = 1.0 - trapezoid(trial.rho, trial.dt) / trial.tau_max;

    std::vector<double> altitude_dev(trial.z.size());
    for (size_t k = 0; k < trial.z.size(); ++k)
        altitude_dev[k] = std::abs(trial.z[k] - trial.z_T[k] - spec.h_goal);
    const double o_h = trapezoid(altitude_dev, trial.dt) / (spec.h_goal * trial.tau_max);
    return o_v + o_h;
}

ConstraintMeasures constraints(const TrialTrajectory& trial, const UAVSpec& spec) {
    ConstraintMeasures c;
    const double dt = trial.dt;
    const double tm = trial.tau_max;

    std::vector<double> height_breach(trial.z.size());
    for (size_t k = 0; k < trial.z.size(); ++k)
        height_breach[k] = std::max(spec.h_min - (trial.z[k] - trial.z_T[k]), 0.0);
    c.c_h = trapezoid(height_breach, dt) / (spec.h_min * tm);

    // Vertical/deceleration normalizations use the magnitude of the (negative)
    // bound; v_s_min = 0 for multi-rotors falls back to the v_s_max scale.
    const double vs_min_norm = spec.v_s_min > 0.0 ? spec.v_s_min : spec.v_s_max;
    c.c_vs_min = violation_integral(trial.v_s, dt, vs_min_norm * tm,
                                    [&](double v) { return spec.v_s_min - v; });
    c.c_vs_max = violation_integral(trial.v_s, dt, spec.v_s_max * tm,
                                    [&](double v) { return v - spec.v_s_max; });
    c.c_vz_min = violation_integral(trial.v_z, dt, std::abs(spec.v_z_min) * tm,
                                    [&](double v) { return spec.v_z_min - v; });
    c.c_vz_max = violation_integral(trial.v_z, dt, spec.v_z_max * tm,
                                    [&](double v) { return v - spec.v_z_max; });
    c.c_as_min = violation_integral(trial.a_s, dt, std::abs(spec.a_s_min) * tm,
                                    [&](double a) { return spec.a_s_min - a; });
    c.c_as_max = violation_integral(trial.a_s, dt, spec.a_s_max * tm,
                                    [&](double a) { return a - spec.a_s_max; });
    c.c_az_min = violation_integral(trial.a_z, dt, std::abs(spec.a_z_min) * tm,
                                    [&](double a) { return spec.a_z_min - a; });
    c.c_az_max = violation_integral(trial.a_z, dt, spec.a_z_max * tm,
                                    [&](double a) { return a - spec.a_z_max; });
    return c;
}

double ConstraintMeasures::max_violation() const {
    double m = 0.0;
    for (double v : as_array()) m = std::max(m, v);
    return m;
}

MsgsResult msgs_minimize(const std::function<double(const std::array<double, 4>&)>& f,
                         const std::function<bool(const std::array<double, 4>&)>& feasible,
                         const std::array<double, 4>& w0, const std::array<double, 4>& lo,
                         const std::array<double, 4>& hi, const MsgsSettings& settings) {
    std::array<double, 4> w = w0;
    std::array<double, 4> scale;
    for (int d = 0; d < 4; ++d) scale[d] = (hi[d] - lo[d]) / 4.0;

    MsgsResult result;
    result.f = f(w);
    int stalled = 0;
    int iter = 0;
    while (iter < settings.max_iterations && stalled < settings.max_stalled &&
           result.f > settings.target_fitness) {
        ++iter;
        double best_f = result.f;
        std::array<double, 4> best_w = w;
        bool improved = false;
        for (int d = 0; d < 4; ++d) {
            for (double dir : {+1.0, -1.0}) {
                std::array<double, 4> cand = w;
                cand[d] = std::clamp(cand[d] + dir * scale[d], lo[d], hi[d]);
                if (cand[d] == w[d]) continue;
                if (!feasible(cand)) continue;
                const double fc = f(cand);
                if (fc < best_f) {
                    best_f = fc;
                    best_w = cand;
                    improved = true;
                }
            }
        }
        if (improved) {
            w = best_w;
            result.f = best_f;
            stalled = 0;
        } else {
            ++stalled;
            for (double& s : scale) s /= 2.0;
        }
    }
    result.w = w;
    result.iterations = iter;
    result.final_scale = scale;
    return result;
}

PredictedPath build_predicted_path(const UAVState& state, const ScalarField& u,
                                   const UAVSpec& spec, const Terrain& terrain,
                                   double first_omega, double dt) {
    const int n_pts = spec.n_pts;
    PredictedPath path;
    path.dt = dt;
    path.tau_max = n_pts * dt;
    path.v_s_max = spec.v_s_max;
    path.xy.reserve(n_pts + 1);
    path.theta.reserve(n_pts + 1);
    path.omega.reserve(n_pts + 1);

    const TerrainMesh& mesh = terrain.mesh();
    const double step_len = spec.v_s_max * dt;
    const double w_max = spec.omega_max();

    Vec2 pos = state.position;
    double theta = state.theta;
    path.xy.push_back(pos);
    path.theta.push_back(theta);

    for (int k = 0; k < n_pts; ++k) {
        double desired;
        if (k == 0) {
            desired = first_omega;
        } else {
            const Vec2 heading = heading_vector(theta);
            Vec2 grad = heading;
            if (mesh.contains(pos)) grad = gradient_direction(u, pos, heading);
            const double cosang = std::clamp(heading.dot(grad), -1.0, 1.0);
            const double magnitude = std::acos(cosang) / dt;
            const double cross = heading.cross(grad);
            const double sign = cross > 0.0 ? 1.0 : (cross < 0.0 ? -1.0 : 1.0);
            desired = std::clamp(sign * magnitude, -w_max, w_max);
        }

        // Keep the path inside the domain with clearance >= delta: fall back
        // to the grid value nearest the desired rate, then to the best
        // clearance achievable.
        auto clearance_of = [&](double w) {
            const Vec2 next = pos + arc_displacement(spec.v_s_max, w, theta, dt);
            if (!mesh.contains(next)) return -std::numeric_limits<double>::infinity();
            const double query = spec.delta + step_len + 2.0 * spec.r_min;
            return std::min(mesh.boundary_distance(next, query), query);
        };

        double chosen = desired;
        if (clearance_of(desired) < spec.delta) {
            double best_clear = -std::numeric_limits<double>::infinity();
            double best_w = desired;
            bool found = false;
            std::vector<double> grid(41);
            for (int g = 0; g < 41; ++g) grid[g] = -w_max + g * (2.0 * w_max / 40.0);
            std::stable_sort(grid.begin(), grid.end(), [&](double a, double b) {
                const double da = std::abs(a - desired), db = std::abs(b - desired);
                if (da != db) return da < db;
                return a > b;
            });
            for (double w : grid) {
                const double clear = clearance_of(w);
                if (clear >= spec.delta) {
                    chosen = w;
                    found = true;
                    break;
                }
                if (clear > best_clear) {
                    best_clear = clear;
                    best_w = w;
                }
            }
            if (!found) chosen = best_w;
        }

        path.omega.push_back(chosen);
        pos += arc_displacement(spec.v_s_max, chosen, theta, dt);
        theta += chosen * dt;
        path.xy.push_back(pos);
        path.theta.push_back(theta);
    }
    path.omega.push_back(path.omega.back());
    return path;
}

std::optional<OptimizedRegime> optimize_regime(const UAVState& state, const PredictedPath& path,
                                               const UAVSpec& spec, const Terrain& terrain,
                                               const std::optional<PreviousVelocities>& prev) {
    const RegimeAnchors anchors{state.rho, state.phi};
    const double rho_min = spec.rho_min();
    const std::array<double, 4> lo{rho_min, rho_min, spec.phi_min, spec.phi_min};
    const std::array<double, 4> hi{1.0, 1.0, spec.phi_max, spec.phi_max};

    auto make_trial = [&](const std::array<double, 4>& w) {
        return build_trial(path, RegimeVector::from_array(w), anchors, spec, terrain, state.z,
                           prev);
    };
    auto f = [&](const std::array<double, 4>& w) { return objective(make_trial(w), spec); };
    auto is_feasible = [&](const std::array<double, 4>& w) {
        return constraints(make_trial(w), spec).feasible();
    };

    // Initial vectors in normalized box coordinates: rho in [rho_min, 1],
    // phi in [0, phi_max] (level flight to steepest climb).
    auto map_w0 = [&](double r1, double r2, double p1, double p2) {
        return std::array<double, 4>{rho_min + r1 * (1.0 - rho_min), rho_min + r2 * (1.0 - rho_min),
                                     p1 * spec.phi_max, p2 * spec.phi_max};
    };
    const std::array<std::array<double, 4>, 3> w0_candidates = {
        map_w0(1.0, 1.0, 0.0, 0.0), map_w0(1.0, 1.0, 1.0, 1.0), map_w0(0.5, 0.5, 1.0, 1.0)};

    std::optional<std::array<double, 4>> w0;
    for (const auto& cand : w0_candidates) {
        if (is_feasible(cand)) {
            w0 = cand;
            break;
        }
    }
    if (!w0) return std::nullopt;

    const MsgsResult opt = msgs_minimize(f, is_feasible, *w0, lo, hi);

    OptimizedRegime result;
    result.w = RegimeVector::from_array(opt.w);
    result.trial = make_trial(opt.w);
    result.objective_value = opt.f;
    result.controls.rho =
        quadratic_regime(path.dt, path.tau_max, anchors.rho0, result.w.rho1, result.w.rho2);
    result.controls.phi =
        quadratic_regime(path.dt, path.tau_max, anchors.phi0, result.w.phi1, result.w.phi2);
    result.controls.omega = result.trial.omega[1];  // tau grid spacing equals dt
    return result;
}

namespace {

// Largest admissible control move toward `target` under the acceleration
// bands, found by bisection on the step fraction.
double bisect_move(double current, double target,
                   const std::function<bool(double)>& admissible) {
    if (admissible(target)) return target;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 40; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (admissible(current + (target - current) * mid))
            lo = mid;
        else
            hi = mid;
    }
    return current + (target - current) * lo;
}

}  // namespace

EscapeResult escape_feasible(const UAVState& start, const UAVSpec& spec, const Terrain& terrain,
                             EscapeSide side, double dt) {
    EscapeResult result;
    result.min_altitude_margin = std::numeric_limits<double>::infinity();
    const double sign = side == EscapeSide::Left ? 1.0 : -1.0;
    const TerrainMesh& mesh = terrain.mesh();

    Vec2 pos = start.position;
    double z = start.z;
    double theta = start.theta;
    double rho = std::clamp(start.rho, spec.rho_min(), 1.0);
    double phi = std::clamp(start.phi, spec.phi_min, spec.phi_max);

    auto altitude_ok = [&](const Vec2& p, double zz) {
        const double margin = zz - terrain.elevation(p) - spec.h_min;
        result.min_altitude_margin = std::min(result.min_altitude_margin, margin);
        return margin >= -1e-9;
    };
    auto clearance_ok = [&](const Vec2& p) {
        if (!mesh.contains(p)) return false;
        const double query = spec.delta * 2.0 + 100.0;
        return mesh.boundary_distance(p, query) >= spec.delta;
    };

    if (!altitude_ok(pos, z) || !clearance_ok(pos)) return result;

    auto [v_s, v_z] = velocity_components_raw(rho, phi, spec);
    double swept = 0.0;
    const int max_steps = 10000;

    for (int step = 0; step < max_steps; ++step) {
        if (v_s <= 1e-6 || swept >= 2.0 * M_PI) {
            result.feasible = true;
            break;
        }

        // Decelerate toward rho_min as fast as the acceleration bands allow.
        const double rho_next = bisect_move(rho, spec.rho_min(), [&](double r) {
            const auto [vs2, vz2] = velocity_components_raw(r, phi, spec);
            const double as = (vs2 - v_s) / dt;
            const double az = (vz2 - v_z) / dt;
            return as >= spec.a_s_min - 1e-12 && as <= spec.a_s_max + 1e-12 &&
                   az >= spec.a_z_min - 1e-12 && az <= spec.a_z_max + 1e-12;
        });
        // Climb toward phi_max under the same bands.
        const double phi_next = bisect_move(phi, spec.phi_max, [&](double p) {
            const auto [vs2, vz2] = velocity_components_raw(rho_next, p, spec);
            const double as = (vs2 - v_s) / dt;
            const double az = (vz2 - v_z) / dt;
            return as >= spec.a_s_min - 1e-12 && as <= spec.a_s_max + 1e-12 &&
                   az >= spec.a_z_min - 1e-12 && az <= spec.a_z_max + 1e-12;
        });

        rho = rho_next;
        phi = phi_next;
        const auto [vs_new, vz_new] = velocity_components_raw(rho, phi, spec);
        v_s = vs_new;
        v_z = vz_new;
        const double omega_em = sign * v_s / spec.r_min;

        if (step == 0) result.first = {rho, phi, omega_em};

        pos += arc_displacement(v_s, omega_em, theta, dt);
        theta += omega_em * dt;
        z += v_z * dt;
        swept += std::abs(omega_em) * dt;
        ++result.steps;

        if (!altitude_ok(pos, z) || !clearance_ok(pos)) return result;
    }
    if (result.steps == 0) {
        // Already at rest (or a degenerate start): trivially feasible.
        result.first = {rho, phi, sign * v_s / spec.r_min};
        result.feasible = true;
    }
    return result;
}

ControlDecision apply_or_escape(const std::optional<Controls>& optimal,
                                const std::optional<EscapeResult>& escape_at_next,
                                const std::function<EscapeResult()>& escape_from_now) {
    if (optimal && escape_at_next && escape_at_next->feasible) {
        return {*optimal, false, false};
    }
    const EscapeResult now = escape_from_now();
    return {now.first, true, !now.feasible};
}

}  // namespace uvs
