#pragma once

#include <utility>
#include <vector>

#include "uavsearch/geom.hpp"

namespace uvs {

class Terrain;
struct UAVState;

// Distance-dependent detection rate Gamma(d) = k * exp(q * (b - d) / s),
// non-increasing in d for q/s > 0.
struct SensingFunction {
    double k = 1.0;
    double b = 0.0;
    double s = 1.0;
    double q = 1.0;

    double operator()(double distance) const;
};

// Downward-looking camera: rectangular FOV pyramid aligned with the heading.
struct SensorSpec {
    double gamma1 = 0.0;  // lateral (across-track) apex angle, rad
    double gamma2 = 0.0;  // longitudinal (along-track) apex angle, rad
    SensingFunction gamma;

    void validate(const std::string& owner) const;
};

// Local sensor-frame coordinates of terrain point p: Rz(theta) * (X - [p, z_T]).
Vec3 local_coords(const Vec3& uav_position, double theta, const Vec2& p, double z_T);

// Pyramid membership. R.y is the lateral offset, R.x the longitudinal one
// (heading-frame axes); faces belong to the pyramid.
bool in_fov(const Vec3& r, const SensorSpec& sensor);

// True when the open segment from the UAV to the terrain point stays strictly
// above the terrain at every probed parameter. Probes advance with a fixed
// horizontal step of min(DEM cellsize, 10 m); endpoints are excluded.
bool line_of_sight(const Vec3& uav_position, const Vec3& surface_point, const Terrain& terrain);

// Gamma(|R|) when inside the FOV and visible, else 0.
double detection_rate(const Vec3& r, const SensorSpec& sensor, bool visible);

// Instantaneous detection rate at every mesh node inside the sensing
// footprint; rates for all other nodes are zero (omitted).
std::vector<std::pair<int, double>> sense_footprint(const UAVState& state,
                                                    const SensorSpec& sensor,
                                                    const Terrain& terrain);

}  // namespace uvs
