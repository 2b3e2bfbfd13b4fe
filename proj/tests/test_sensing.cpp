#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "mesh_builder.hpp"
#include "test_uavs.hpp"
#include "uavsearch/sensing.hpp"
#include "uavsearch/terrain.hpp"

using namespace uvs;
namespace ts = uvs::testing;

namespace {

Terrain flat_terrain(double w = 400, double h = 400, int nx = 40, int ny = 40, double z = 0.0) {
    const auto m = ts::build_rect_mesh(w, h, nx, ny, [z](double, double) { return z; });
    return Terrain(TerrainMesh(m.nodes, m.triangles));
}

}  // namespace

TEST_CASE("local coordinates follow the planar rotation") {
    SUBCASE("pure vertical offset") {
        const Vec3 r = local_coords({0, 0, 50}, 0.0, {0, 0}, 0.0);
        CHECK(r.x == doctest::Approx(0));
        CHECK(r.y == doctest::Approx(0));
        CHECK(r.z == doctest::Approx(50));
    }
    SUBCASE("quarter-turn heading") {
        const Vec3 r = local_coords({0, 0, 50}, M_PI / 2, {10, 0}, 0.0);
        CHECK(r.x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.y == doctest::Approx(-10.0));
        CHECK(r.z == doctest::Approx(50));
    }
    SUBCASE("coincident point") {
        const Vec3 r = local_coords({3, 4, 9}, 1.0, {3, 4}, 9.0);
        CHECK(r.norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("FOV pyramid membership") {
    SensorSpec sensor;
    sensor.gamma1 = deg_to_rad(90);
    sensor.gamma2 = deg_to_rad(60);
    sensor.gamma = {1.0, 0.0, 1.0, 1.0};

    CHECK(in_fov({0, 0, 50}, sensor));                       // on the axis
    CHECK(in_fov({0, 100 * std::tan(M_PI / 4), 100}, sensor));  // exactly on the lateral face
    CHECK_FALSE(in_fov({0, 100.0001, 100}, sensor));
    CHECK_FALSE(in_fov({0, 0, 0}, sensor));   // apex plane
    CHECK_FALSE(in_fov({0, 0, -10}, sensor)); // behind the sensor
    CHECK(in_fov({100 * std::tan(M_PI / 6), 0, 100}, sensor));
    CHECK_FALSE(in_fov({100 * std::tan(M_PI / 6) + 0.001, 0, 100}, sensor));
}

TEST_CASE("sensing function values") {
    const SensingFunction gamma_a{1.2, -50, 25, 0.55};
    // closed form k * exp(q * (b - d) / s)
    CHECK(gamma_a(0.0) == doctest::Approx(1.2 * std::exp(0.55 * -50.0 / 25.0)));
    CHECK(gamma_a(0.0) == doctest::Approx(0.3995).epsilon(5e-4));
    CHECK(gamma_a(50.0) == doctest::Approx(1.2 * std::exp(0.55 * -100.0 / 25.0)));
    CHECK(gamma_a(50.0) == doctest::Approx(0.1330).epsilon(5e-4));

    SUBCASE("outside the FOV the rate is zero") {
        SensorSpec sensor;
        sensor.gamma1 = deg_to_rad(60);
        sensor.gamma2 = deg_to_rad(40);
        sensor.gamma = gamma_a;
        CHECK(detection_rate({500, 0, 50}, sensor, true) == 0.0);
        CHECK(detection_rate({0, 0, 50}, sensor, true) ==
              doctest::Approx(gamma_a(50.0)));
        CHECK(detection_rate({0, 0, 50}, sensor, false) == 0.0);
    }
}

TEST_CASE("line of sight") {
    SUBCASE("flat terrain never occludes") {
        const auto terrain = flat_terrain();
        CHECK(line_of_sight({200, 200, 50}, {250, 220, 0}, terrain));
        CHECK(line_of_sight({200, 200, 50}, {200, 200, 0}, terrain));  // vertical ray
    }
    SUBCASE("a ridge between sensor and target blocks the ray") {
        // ridge of height 100 at x in [180, 220], target in the valley beyond
        auto ridge = [](double x, double) {
            return (x > 180 && x < 220) ? 100.0 : 0.0;
        };
        const auto m = ts::build_rect_mesh(400, 400, 100, 20, ridge);
        const Terrain terrain(TerrainMesh(m.nodes, m.triangles));
        CHECK_FALSE(line_of_sight({100, 200, 50}, {300, 200, 0}, terrain));
        // high enough to see over
        CHECK(line_of_sight({100, 200, 250}, {300, 200, 0}, terrain));
    }
}

TEST_CASE("footprint over flat terrain matches the projected rectangle") {
    const auto terrain = flat_terrain(400, 400, 80, 80);  // 5 m node spacing
    const auto spec = ts::uav_a();
    UAVState st;
    st.position = {200, 200};
    st.z = 50;
    st.theta = 0.0;

    const auto rates = sense_footprint(st, spec.sensor, terrain);
    CHECK_FALSE(rates.empty());

    const double half_lat = 50 * std::tan(spec.sensor.gamma1 / 2);
    const double half_lon = 50 * std::tan(spec.sensor.gamma2 / 2);
    std::set<int> sensed;
    for (const auto& [node, rate] : rates) {
        CHECK(rate > 0.0);
        sensed.insert(node);
        const auto& nd = terrain.mesh().nodes()[node];
        CHECK(std::abs(nd.x - 200) <= half_lon + 1e-9);  // heading +x: along-track is x
        CHECK(std::abs(nd.y - 200) <= half_lat + 1e-9);
    }
    // every node inside the rectangle is sensed
    for (int i = 0; i < terrain.mesh().node_count(); ++i) {
        const auto& nd = terrain.mesh().nodes()[i];
        if (std::abs(nd.x - 200) < half_lon - 1e-9 && std::abs(nd.y - 200) < half_lat - 1e-9)
            CHECK(sensed.count(i) == 1);
    }
}

TEST_CASE("footprint properties") {
    const auto spec = ts::uav_a();

    SUBCASE("occluded pit sees nothing") {
        // UAV deep inside a pit whose walls rise above it on all sides
        auto pit = [](double x, double y) {
            const double r = std::hypot(x - 200, y - 200);
            return r < 30 ? 0.0 : 300.0;
        };
        const auto m = ts::build_rect_mesh(400, 400, 60, 60, pit);
        const Terrain terrain(TerrainMesh(m.nodes, m.triangles));
        UAVState st;
        st.position = {200, 200};
        st.z = 50;
        const auto rates = sense_footprint(st, spec.sensor, terrain);
        for (const auto& [node, rate] : rates) {
            const auto& nd = terrain.mesh().nodes()[node];
            CHECK(std::hypot(nd.x - 200, nd.y - 200) < 60);  // only the pit floor is visible
        }
    }

    SUBCASE("heading rotation by pi mirrors the footprint") {
        const auto terrain = flat_terrain(400, 400, 80, 80);
        UAVState st;
        st.position = {200, 200};
        st.z = 60;
        st.theta = 0.3;
        const auto fwd = sense_footprint(st, spec.sensor, terrain);
        st.theta = 0.3 + M_PI;
        const auto rev = sense_footprint(st, spec.sensor, terrain);
        // mirrored node set: node (x, y) maps to (400-x, 400-y) on this symmetric mesh
        std::set<std::pair<long, long>> fwd_set, rev_set;
        for (const auto& [node, rate] : fwd) {
            const auto& nd = terrain.mesh().nodes()[node];
            fwd_set.insert({std::lround(nd.x * 100), std::lround(nd.y * 100)});
        }
        for (const auto& [node, rate] : rev) {
            const auto& nd = terrain.mesh().nodes()[node];
            rev_set.insert({std::lround((400 - nd.x) * 100), std::lround((400 - nd.y) * 100)});
        }
        CHECK(fwd_set == rev_set);
    }

    SUBCASE("rates are invariant under global translation") {
        auto bumps = [](double x, double y) {
            return 10 * std::sin(x / 20.0) * std::cos(y / 30.0);
        };
        const double shift = 2000.0;
        const auto m1 = ts::build_rect_mesh(400, 400, 50, 50, bumps);
        auto m2 = m1;
        for (auto& nd : m2.nodes) {
            nd.x += shift;
            nd.y += shift;
        }
        const Terrain t1(TerrainMesh(m1.nodes, m1.triangles));
        const Terrain t2(TerrainMesh(m2.nodes, m2.triangles));
        UAVState s1, s2;
        s1.position = {173, 211};
        s1.z = 70;
        s1.theta = 0.8;
        s2 = s1;
        s2.position = {173 + shift, 211 + shift};
        const auto r1 = sense_footprint(s1, spec.sensor, t1);
        const auto r2 = sense_footprint(s2, spec.sensor, t2);
        REQUIRE(r1.size() == r2.size());
        for (size_t i = 0; i < r1.size(); ++i)
            CHECK(r1[i].second == doctest::Approx(r2[i].second).epsilon(1e-9));
    }

    SUBCASE("rate directly beneath decreases with altitude; node count grows") {
        const auto terrain = flat_terrain(800, 800, 80, 80);
        UAVState st;
        st.position = {400, 400};
        auto rate_below = [&](double alt) {
            st.z = alt;
            const auto rates = sense_footprint(st, spec.sensor, terrain);
            double below = 0.0;
            for (const auto& [node, rate] : rates) {
                const auto& nd = terrain.mesh().nodes()[node];
                if (nd.x == 400 && nd.y == 400) below = rate;
            }
            return std::make_pair(below, rates.size());
        };
        const auto [r50, n50] = rate_below(50);
        const auto [r100, n100] = rate_below(100);
        CHECK(r50 > r100);
        CHECK(n100 >= n50);
    }
}
