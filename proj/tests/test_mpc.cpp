#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mesh_builder.hpp"
#include "test_uavs.hpp"
#include "uavsearch/fields.hpp"
#include "uavsearch/mpc.hpp"

using namespace uvs;
namespace ts = uvs::testing;

namespace {

// Independent Lagrange oracle for the three-point quadratic.
double lagrange3(double tau, double tm, double v0, double v1, double v2) {
    const double t0 = 0.0, t1 = tm / 2.0, t2 = tm;
    return v0 * (tau - t1) * (tau - t2) / ((t0 - t1) * (t0 - t2)) +
           v1 * (tau - t0) * (tau - t2) / ((t1 - t0) * (t1 - t2)) +
           v2 * (tau - t0) * (tau - t1) / ((t2 - t0) * (t2 - t1));
}

struct World {
    std::unique_ptr<Terrain> terrain;
    explicit World(const ts::ElevationFn& elev, double w = 4000, double h = 4000, int nx = 80,
                   int ny = 80) {
        const auto m = ts::build_rect_mesh(w, h, nx, ny, elev);
        terrain = std::make_unique<Terrain>(TerrainMesh(m.nodes, m.triangles));
    }
};

ScalarField field_linear_x(const TerrainMesh& mesh) {
    ScalarField u(&mesh);
    for (int i = 0; i < u.size(); ++i) u[i] = mesh.nodes()[i].x;
    return u;
}

}  // namespace

TEST_CASE("quadratic regime interpolation") {
    SUBCASE("constant data is reproduced exactly") {
        for (double tau : {0.0, 3.7, 10.0, 20.0})
            CHECK(quadratic_regime(tau, 20.0, 0.6, 0.6, 0.6) ==
                  doctest::Approx(0.6).epsilon(1e-14));
    }
    SUBCASE("matches the Lagrange oracle on random data") {
        std::mt19937 rng(4);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            const double tm = 5.0 + uni(rng) * 40.0;
            const double v0 = uni(rng), v1 = uni(rng), v2 = uni(rng);
            const double tau = uni(rng) * tm;
            CHECK(quadratic_regime(tau, tm, v0, v1, v2) ==
                  doctest::Approx(lagrange3(tau, tm, v0, v1, v2)).epsilon(1e-12));
        }
    }
    SUBCASE("anchored ramp: rho (0, 0.5, 0.5) reaches 0.3125 at tau_max/4") {
        // oracle value: quadratic through (0,0), (tm/2,0.5), (tm,0.5)
        const double tm = 20.0;
        CHECK(lagrange3(tm / 4, tm, 0.0, 0.5, 0.5) == doctest::Approx(0.3125));
        CHECK(quadratic_regime(tm / 4, tm, 0.0, 0.5, 0.5) == doctest::Approx(0.3125));
    }
    SUBCASE("phi anchors (0, 1, 1)*phi_max stay within phi_max on the window") {
        const double tm = 20.0, phi_max = 0.25;
        double peak = 0.0;
        for (int k = 0; k <= 400; ++k)
            peak = std::max(peak, quadratic_regime(tm * k / 400, tm, 0.0, phi_max, phi_max));
        CHECK(peak <= phi_max + 1e-12);
        CHECK(peak == doctest::Approx(phi_max).epsilon(1e-9));
    }
}

TEST_CASE("predicted path") {
    World world([](double, double) { return 0.0; });
    const auto spec = ts::uav_a();
    UAVState st;
    st.position = {2000, 2000};
    st.theta = 0.0;
    st.z = 50;

    SUBCASE("gradient along the heading keeps the path straight") {
        const auto u = field_linear_x(world.terrain->mesh());
        const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);
        CHECK(path.tau_max == doctest::Approx(20.0));
        CHECK(path.s_max() == doctest::Approx(200.0));
        REQUIRE(path.xy.size() == 21);
        CHECK(path.xy.back().x == doctest::Approx(2200.0));
        CHECK(path.xy.back().y == doctest::Approx(2000.0));
        for (double w : path.omega) CHECK(w == doctest::Approx(0.0));
    }
    SUBCASE("constant field continues straight via the gradient fallback") {
        ScalarField u(&world.terrain->mesh(), 1.0);
        const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);
        CHECK(path.xy.back().x == doctest::Approx(2200.0));
    }
    SUBCASE("first step applies the resolved omega") {
        const auto u = field_linear_x(world.terrain->mesh());
        const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.25, 1.0);
        CHECK(path.omega[0] == doctest::Approx(0.25));
    }
    SUBCASE("boundary ahead bends the path to keep clearance") {
        UAVState near_edge;
        near_edge.position = {2000, 60};
        near_edge.theta = -M_PI / 2;  // straight at the y = 0 edge
        near_edge.z = 50;
        ScalarField u(&world.terrain->mesh(), 1.0);
        const auto path = build_predicted_path(near_edge, u, spec, *world.terrain,
                                               -0.0, 1.0);
        for (const auto& p : path.xy) {
            CHECK(world.terrain->mesh().contains(p));
            CHECK(world.terrain->mesh().boundary_distance(p, 1000.0) >= spec.delta - 1e-9);
        }
    }
    SUBCASE("arc-length lookup is exact on the grid and omega sampling is clamped") {
        const auto u = field_linear_x(world.terrain->mesh());
        const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.1, 1.0);
        for (size_t k = 0; k < path.xy.size(); ++k) {
            const Vec2 p = path.position_at_s(k * spec.v_s_max * 1.0);
            CHECK(p.x == doctest::Approx(path.xy[k].x).epsilon(1e-12));
            CHECK(p.y == doctest::Approx(path.xy[k].y).epsilon(1e-12));
        }
        CHECK(path.omega_at_s(1e9) == doctest::Approx(path.omega.back()));
    }
}

TEST_CASE("trial trajectories") {
    World world([](double, double) { return 0.0; });
    const auto spec = ts::uav_a();
    UAVState st;
    st.position = {2000, 2000};
    st.theta = 0.0;
    st.z = 50;
    const auto u = field_linear_x(world.terrain->mesh());
    const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);
    const RegimeAnchors anchors{1.0, 0.0};

    SUBCASE("identity regime reproduces the predicted path") {
        const auto trial = build_trial(path, {1, 1, 0, 0}, anchors, spec, *world.terrain, st.z);
        for (size_t k = 0; k < path.xy.size(); ++k) {
            CHECK(trial.xy[k].x == doctest::Approx(path.xy[k].x).epsilon(1e-12));
            CHECK(trial.z[k] == doctest::Approx(50.0));
            CHECK(trial.s[k] == doctest::Approx(10.0 * k));
        }
        CHECK_FALSE(trial.clamped_at_path_end);
    }
    SUBCASE("half-speed regime covers half the path") {
        const RegimeAnchors half{0.5, 0.0};
        const auto trial = build_trial(path, {0.5, 0.5, 0, 0}, half, spec, *world.terrain, st.z);
        CHECK(trial.s.back() == doctest::Approx(100.0).epsilon(1e-12));
        CHECK(trial.xy.back().x == doctest::Approx(2100.0).epsilon(1e-9));
    }
    SUBCASE("vertical ascent: no horizontal progress, full climb, zero omega") {
        const RegimeAnchors up{1.0, M_PI / 2};
        const auto trial =
            build_trial(path, {1, 1, M_PI / 2, M_PI / 2}, up, spec, *world.terrain, st.z);
        CHECK(trial.s.back() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(trial.z.back() == doctest::Approx(50.0 + 5.0 * 20.0).epsilon(1e-12));
        for (double w : trial.omega) CHECK(w == doctest::Approx(0.0));
    }
    SUBCASE("scaled omega follows the arc position") {
        // curved path: constant first omega then gradient steering
        const auto curved = build_predicted_path(st, u, spec, *world.terrain, 0.3, 1.0);
        const RegimeAnchors half{0.5, 0.0};
        const auto trial =
            build_trial(curved, {0.5, 0.5, 0, 0}, half, spec, *world.terrain, st.z);
        // at tau = dt: v_s = 5, s = 5, omega_bar interpolated at s = 5
        CHECK(trial.omega[1] ==
              doctest::Approx(0.5 * curved.omega_at_s(trial.s[1])).epsilon(1e-12));
    }
}

TEST_CASE("objective") {
    World world([](double, double) { return 0.0; });
    const auto spec = ts::uav_a();
    UAVState st;
    st.position = {2000, 2000};
    st.theta = 0.0;
    const auto u = field_linear_x(world.terrain->mesh());
    const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);

    SUBCASE("full speed at goal altitude scores zero") {
        st.z = 50;  // h_goal above flat terrain
        const auto trial =
            build_trial(path, {1, 1, 0, 0}, {1.0, 0.0}, spec, *world.terrain, st.z);
        CHECK(objective(trial, spec) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("half speed adds 0.5") {
        st.z = 50;
        const auto trial =
            build_trial(path, {0.5, 0.5, 0, 0}, {0.5, 0.0}, spec, *world.terrain, st.z);
        CHECK(objective(trial, spec) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("double goal altitude adds 1") {
        st.z = 100;
        const auto trial =
            build_trial(path, {1, 1, 0, 0}, {1.0, 0.0}, spec, *world.terrain, st.z);
        CHECK(objective(trial, spec) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("invariant under path resampling with a denser grid") {
        st.z = 80;
        auto dense_spec = spec;
        dense_spec.n_pts = 40;  // same tau_max via halved dt
        const auto dense_path =
            build_predicted_path(st, u, dense_spec, *world.terrain, 0.0, 0.5);
        const auto coarse =
            build_trial(path, {0.8, 0.9, 0.05, 0.1}, {1.0, 0.0}, spec, *world.terrain, st.z);
        const auto fine = build_trial(dense_path, {0.8, 0.9, 0.05, 0.1}, {1.0, 0.0}, dense_spec,
                                      *world.terrain, st.z);
        CHECK(objective(coarse, spec) == doctest::Approx(objective(fine, dense_spec)).epsilon(1e-4));
    }
}

TEST_CASE("constraint measures") {
    World world([](double, double) { return 0.0; });
    const auto spec = ts::uav_a();
    UAVState st;
    st.position = {2000, 2000};
    st.theta = 0.0;
    const auto u = field_linear_x(world.terrain->mesh());
    const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);

    SUBCASE("interior of the feasible set scores zero on all nine measures") {
        st.z = 50;
        const auto trial =
            build_trial(path, {1, 1, 0, 0}, {1.0, 0.0}, spec, *world.terrain, st.z);
        const auto c = constraints(trial, spec);
        for (double v : c.as_array()) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(c.feasible());
    }
    SUBCASE("constant altitude h_min/2 gives c_h = 0.5") {
        st.z = 15;  // h_min = 30
        const auto trial =
            build_trial(path, {1, 1, 0, 0}, {1.0, 0.0}, spec, *world.terrain, st.z);
        const auto c = constraints(trial, spec);
        CHECK(c.c_h == doctest::Approx(0.5).epsilon(1e-12));
        CHECK_FALSE(c.feasible());
    }
    SUBCASE("rho jump 0 -> 1 in one sample breaks the acceleration band") {
        // piecewise regime forced through anchors: rho0 = 0 with W rho = (1, 1)
        st.z = 50;
        const auto trial =
            build_trial(path, {1, 1, 0, 0}, {0.0, 0.0}, spec, *world.terrain, st.z);
        // quadratic rises ~0.29 over the first second -> a_s ~ 2.9 > 2
        const auto c = constraints(trial, spec);
        CHECK(c.c_as_max > 0.0);
    }
}

TEST_CASE("pattern search (MSGS)") {
    const std::array<double, 4> lo{0, 0, 0, 0}, hi{1, 1, 1, 1};
    SUBCASE("interior convex quadratic reaches the target fitness in 30 iterations") {
        const std::array<double, 4> star{0.42, 0.31, 0.77, 0.55};
        auto f = [&](const std::array<double, 4>& w) {
            double acc = 0.0;
            for (int d = 0; d < 4; ++d) acc += (w[d] - star[d]) * (w[d] - star[d]);
            return acc;
        };
        const auto res =
            msgs_minimize(f, [](const auto&) { return true; }, {0.9, 0.9, 0.1, 0.1}, lo, hi);
        CHECK(res.f <= 1e-3);
        CHECK(res.iterations <= 30);
    }
    SUBCASE("constant objective stops after 10 stalled iterations") {
        int evals = 0;
        auto f = [&](const std::array<double, 4>&) {
            ++evals;
            return 5.0;
        };
        const auto res =
            msgs_minimize(f, [](const auto&) { return true; }, {0.5, 0.5, 0.5, 0.5}, lo, hi);
        CHECK(res.iterations == 10);
        CHECK(res.f == doctest::Approx(5.0));
        CHECK(res.w == std::array<double, 4>{0.5, 0.5, 0.5, 0.5});
    }
    SUBCASE("optimum on a box face is reached within the final step scale") {
        const std::array<double, 4> star{1.0, 0.3, 0.0, 0.6};
        auto f = [&](const std::array<double, 4>& w) {
            double acc = 0.0;
            for (int d = 0; d < 4; ++d) acc += (w[d] - star[d]) * (w[d] - star[d]);
            return acc;
        };
        const auto res =
            msgs_minimize(f, [](const auto&) { return true; }, {0.5, 0.5, 0.5, 0.5}, lo, hi);
        for (int d = 0; d < 4; ++d)
            CHECK(std::abs(res.w[d] - star[d]) <= 2 * res.final_scale[d] + 1e-3);
    }
    SUBCASE("never returns worse than the start") {
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            const double a = uni(rng), b = uni(rng), c = uni(rng), d = uni(rng);
            auto f = [&](const std::array<double, 4>& w) {
                return std::sin(7 * w[0] + a) + std::cos(5 * w[1] + b) + w[2] * c - w[3] * d;
            };
            const std::array<double, 4> w0{uni(rng), uni(rng), uni(rng), uni(rng)};
            const double f0 = f(w0);
            const auto res = msgs_minimize(f, [](const auto&) { return true; }, w0, lo, hi);
            CHECK(res.f <= f0 + 1e-15);
        }
    }
    SUBCASE("infeasible candidates are rejected outright") {
        // feasibility forbids w[0] < 0.5; optimum of f sits at w[0] = 0
        auto f = [](const std::array<double, 4>& w) { return w[0]; };
        auto feas = [](const std::array<double, 4>& w) { return w[0] >= 0.5; };
        const auto res = msgs_minimize(f, feas, {0.75, 0.5, 0.5, 0.5}, lo, hi);
        CHECK(res.w[0] >= 0.5);
        CHECK(res.f >= 0.5);
    }
}

TEST_CASE("optimize_regime") {
    const auto spec = ts::uav_a();

    SUBCASE("flat terrain at goal altitude keeps the near-zero objective") {
        World world([](double, double) { return 0.0; });
        UAVState st;
        st.position = {2000, 2000};
        st.theta = 0.0;
        st.z = 50;
        st.rho = 1.0;
        st.phi = 0.0;
        const auto u = field_linear_x(world.terrain->mesh());
        const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);
        const auto result = optimize_regime(st, path, spec, *world.terrain, std::nullopt);
        REQUIRE(result.has_value());
        CHECK(result->objective_value <= 1e-3);
        CHECK(result->controls.rho == doctest::Approx(1.0).epsilon(1e-6));
    }

    SUBCASE("steep wall ahead forces a climbing seed") {
        // ramp steeper than the full-speed climb ratio (0.5): slope 1.2 over x
        auto wall = [](double x, double) {
            return x < 2100 ? 0.0 : std::min(1.2 * (x - 2100), 300.0);
        };
        World world(wall);
        UAVState st;
        st.position = {2000, 2000};
        st.theta = 0.0;
        st.z = 50;
        st.rho = 1.0;
        st.phi = 0.0;
        const auto u = field_linear_x(world.terrain->mesh());
        const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);

        // W_0a (full speed, level) violates the altitude constraint here
        const auto level =
            build_trial(path, {1, 1, 0, 0}, {st.rho, st.phi}, spec, *world.terrain, st.z);
        CHECK(constraints(level, spec).c_h > 0.0);

        const auto result = optimize_regime(st, path, spec, *world.terrain, std::nullopt);
        REQUIRE(result.has_value());
        const auto c = constraints(result->trial, spec);
        CHECK(c.feasible());
        CHECK(result->controls.phi > 0.0);  // it climbs
    }

    SUBCASE("box canyon admits no regime at all") {
        // cliff to 500 m right in front: even the steepest climb cannot hold h_min
        auto cliff = [](double x, double) { return x < 2040 ? 0.0 : 500.0; };
        World world(cliff);
        UAVState st;
        st.position = {2000, 2000};
        st.theta = 0.0;
        st.z = 50;
        st.rho = 1.0;
        st.phi = 0.0;
        const auto u = field_linear_x(world.terrain->mesh());
        const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);
        const auto result = optimize_regime(st, path, spec, *world.terrain, std::nullopt);
        CHECK_FALSE(result.has_value());

        // dense-grid confirmation that the whole W box is infeasible
        bool any_feasible = false;
        for (double r1 : {0.0, 0.25, 0.5, 0.75, 1.0})
            for (double r2 : {0.0, 0.5, 1.0})
                for (double p1 : {0.0, 0.5, 1.0})
                    for (double p2 : {0.0, 0.5, 1.0}) {
                        const RegimeVector w{r1, r2, p1 * spec.phi_max, p2 * spec.phi_max};
                        const auto trial =
                            build_trial(path, w, {st.rho, st.phi}, spec, *world.terrain, st.z);
                        if (constraints(trial, spec).feasible()) any_feasible = true;
                    }
        CHECK_FALSE(any_feasible);
    }
}

TEST_CASE("extract controls at tau = dt") {
    World world([](double, double) { return 0.0; });
    const auto spec = ts::uav_a();
    UAVState st;
    st.position = {2000, 2000};
    st.theta = 0.0;
    st.z = 50;
    st.rho = 1.0;
    const auto u = field_linear_x(world.terrain->mesh());
    const auto path = build_predicted_path(st, u, spec, *world.terrain, 0.0, 1.0);

    SUBCASE("constant regime returns the constants") {
        const auto trial = build_trial(path, {1, 1, 0, 0}, {1.0, 0.0}, spec, *world.terrain, st.z);
        CHECK(quadratic_regime(1.0, 20.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
        CHECK(trial.omega[1] == doctest::Approx(0.0));
    }
    SUBCASE("quadratic evaluation at dt matches the oracle") {
        CHECK(quadratic_regime(1.0, 20.0, 1.0, 0.5, 0.5) ==
              doctest::Approx(lagrange3(1.0, 20.0, 1.0, 0.5, 0.5)).epsilon(1e-14));
    }
}

TEST_CASE("escape maneuver") {
    const auto spec = ts::uav_a();

    SUBCASE("multi-rotor over flat terrain decelerates to hover feasibly") {
        World world([](double, double) { return 0.0; });
        UAVState st;
        st.position = {2000, 2000};
        st.theta = 0.0;
        st.z = 50;
        st.rho = 1.0;
        st.phi = 0.0;
        const auto esc = escape_feasible(st, spec, *world.terrain, EscapeSide::Left, 1.0);
        CHECK(esc.feasible);
        CHECK(esc.steps < 10);  // 10 m/s at -3.6 m/s^2 stops within ~3 s
        CHECK(esc.first.omega > 0.0);  // left turn
        CHECK(esc.min_altitude_margin >= 0.0);
    }

    SUBCASE("terrain step inside the escape circle: unclimbable means infeasible") {
        auto make_world = [](double step_height) {
            return World([step_height](double x, double) {
                return x > 2020 ? step_height : 0.0;
            });
        };
        UAVState st;
        st.position = {2000, 2000};
        st.theta = 0.0;  // the left escape circle sweeps into x > 2000
        st.z = 35;       // barely above h_min = 30
        st.rho = 1.0;
        st.phi = 0.0;

        World tall = make_world(120.0);
        const auto blocked = escape_feasible(st, spec, *tall.terrain, EscapeSide::Left, 1.0);
        CHECK_FALSE(blocked.feasible);

        SUBCASE("monotone in terrain: lowering the step restores feasibility") {
            World low = make_world(0.5);
            const auto ok = escape_feasible(st, spec, *low.terrain, EscapeSide::Left, 1.0);
            CHECK(ok.feasible);
        }
    }

    SUBCASE("fixed-wing spans the full circle") {
        const auto fw = ts::uav_c();
        World world([](double, double) { return 0.0; }, 8000, 8000, 60, 60);
        UAVState st;
        st.position = {4000, 4000};
        st.theta = 0.0;
        st.z = 150;
        st.rho = 1.0;
        st.phi = 0.0;
        const auto esc = escape_feasible(st, fw, *world.terrain, EscapeSide::Right, 2.0);
        CHECK(esc.feasible);
        CHECK(esc.swept_angle >= 2 * M_PI - 1e-9);
        CHECK(esc.first.omega < 0.0);
    }
}

TEST_CASE("apply_or_escape decision rule") {
    const Controls optimal{0.9, 0.1, 0.2};
    const Controls escape_now{0.1, 0.5, -0.4};
    int lazy_calls = 0;
    auto escape_from_now = [&]() {
        ++lazy_calls;
        EscapeResult r;
        r.feasible = true;
        r.first = escape_now;
        return r;
    };

    SUBCASE("feasible escape at the next state applies the optimal controls") {
        EscapeResult at_next;
        at_next.feasible = true;
        const auto d = apply_or_escape(optimal, at_next, escape_from_now);
        CHECK_FALSE(d.used_escape);
        CHECK(d.controls.rho == doctest::Approx(0.9));
        CHECK(lazy_calls == 0);
    }
    SUBCASE("optimizer infeasible slides straight into the escape") {
        const auto d = apply_or_escape(std::nullopt, std::nullopt, escape_from_now);
        CHECK(d.used_escape);
        CHECK(d.controls.rho == doctest::Approx(0.1));
        CHECK(lazy_calls == 1);
    }
    SUBCASE("escape infeasible at t+dt falls back to escape from t") {
        EscapeResult at_next;
        at_next.feasible = false;
        const auto d = apply_or_escape(optimal, at_next, escape_from_now);
        CHECK(d.used_escape);
        CHECK(d.controls.omega == doctest::Approx(-0.4));
    }
}
