#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "uavsearch/geom.hpp"

namespace uvs {

struct UAVSpec;  // motion.hpp

struct MeshNode {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;  // terrain elevation z_T at the node
};

// One closed loop of the 2D domain boundary.
struct BoundaryLoop {
    std::vector<int> edges;   // indices into TerrainMesh::boundary_edges
    int physical_tag = -1;    // tag carried by the mesh file's line elements, -1 if none
    bool is_hole = false;     // no-fly zone when true, outer boundary otherwise
    double signed_area = 0.0; // of the polygon the loop encloses
};

// Triangulated search domain with nodal elevation. Immutable after load;
// safe for unrestricted concurrent reads.
class TerrainMesh {
public:
    TerrainMesh(std::vector<MeshNode> nodes, std::vector<std::array<int, 3>> triangles,
                std::vector<std::pair<int, int>> tagged_boundary_lines = {},
                std::vector<int> line_tags = {});

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int triangle_count() const { return static_cast<int>(triangles_.size()); }
    const std::vector<MeshNode>& nodes() const { return nodes_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<std::pair<int, int>>& boundary_edges() const { return boundary_edges_; }
    const std::vector<BoundaryLoop>& boundary_loops() const { return loops_; }

    double area() const { return total_area_; }
    double triangle_area(int t) const { return tri_area_[t]; }
    // Constant gradient of the linear elevation interpolant on triangle t.
    Vec2 elevation_gradient(int t) const;

    // Index of the triangle containing p, or -1. Points on shared edges
    // resolve to the lowest containing triangle index.
    int locate(const Vec2& p) const;
    bool contains(const Vec2& p) const { return locate(p) >= 0; }

    // Barycentric coordinates of p in triangle t (sum to 1, may be negative outside).
    std::array<double, 3> barycentric(int t, const Vec2& p) const;

    // Linear interpolation of nodal elevation; throws DomainError outside the domain.
    double elevation_at(const Vec2& p) const;
    // As above but returns nullopt outside instead of throwing.
    std::optional<double> try_elevation_at(const Vec2& p) const;

    // Interpolate an arbitrary nodal field at p inside triangle t.
    double interpolate(int t, const Vec2& p, const std::vector<double>& nodal) const;

    // Node indices whose (x, y) falls into the axis-aligned box [lo, hi].
    void nodes_in_box(const Vec2& lo, const Vec2& hi, std::vector<int>& out) const;

    // Minimum distance from p to any boundary edge (outer and holes),
    // capped: returns +inf when nothing lies within `radius`.
    double boundary_distance(const Vec2& p, double radius) const;

    double min_elevation() const { return z_min_; }
    double max_elevation() const { return z_max_; }
    Vec2 bbox_lo() const { return bbox_lo_; }
    Vec2 bbox_hi() const { return bbox_hi_; }

private:
    void validate_and_orient(const std::vector<std::pair<int, int>>& tagged_lines,
                             const std::vector<int>& line_tags);
    void build_grids();

    std::vector<MeshNode> nodes_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<std::pair<int, int>> boundary_edges_;
    std::vector<BoundaryLoop> loops_;
    std::vector<double> tri_area_;
    double total_area_ = 0.0;
    double z_min_ = 0.0, z_max_ = 0.0;

    Vec2 bbox_lo_, bbox_hi_;
    double cell_ = 1.0;
    int gx_ = 0, gy_ = 0;
    std::vector<std::vector<int32_t>> tri_cells_;   // triangle ids per cell, ascending
    std::vector<std::vector<int32_t>> node_cells_;  // node ids per cell
    std::vector<std::vector<int32_t>> edge_cells_;  // boundary edge ids per cell
};

// Regular-grid elevation raster (ESRI ASCII grid).
class DemRaster {
public:
    DemRaster(int ncols, int nrows, double xll, double yll, double cellsize,
              double nodata, std::vector<double> values);

    int ncols() const { return ncols_; }
    int nrows() const { return nrows_; }
    double cellsize() const { return cellsize_; }

    // Bilinear interpolation between cell centers; nullopt outside the grid
    // or when a contributing cell is NODATA.
    std::optional<double> elevation(const Vec2& p) const;

private:
    double at(int row, int col) const { return values_[static_cast<size_t>(row) * ncols_ + col]; }

    int ncols_, nrows_;
    double xll_, yll_, cellsize_, nodata_;
    std::vector<double> values_;
};

// Gmsh MSH 2.2 ASCII subset: $Nodes / $Elements with type-2 triangles and
// optional type-1 boundary lines whose physical tags label boundary loops.
TerrainMesh load_mesh(const std::string& path);

// ESRI ASCII grid (ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value header).
DemRaster load_dem(const std::string& path);

// Mesh plus optional DEM raster. Elevation probes for simulation default to
// the mesh; line-of-sight probes prefer the raster so rays can cross no-fly
// holes where the mesh has no elements.
class Terrain {
public:
    explicit Terrain(TerrainMesh mesh, std::optional<DemRaster> dem = std::nullopt);

    const TerrainMesh& mesh() const { return mesh_; }
    bool has_dem() const { return dem_.has_value(); }
    const DemRaster* dem() const { return dem_ ? &*dem_ : nullptr; }

    // Elevation for trajectory probes: mesh interpolation, falling back to the
    // raster and then to the nearest node for points off the mesh.
    double elevation(const Vec2& p) const;

    // Elevation for ray-trace probes; nullopt means "no terrain sample here"
    // (the probe cannot occlude).
    std::optional<double> los_elevation(const Vec2& p) const;

    // Horizontal sampling step for ray traces.
    double los_step() const;

private:
    TerrainMesh mesh_;
    std::optional<DemRaster> dem_;
};

struct InclineEntry {
    std::string uav_name;
    double kappa = 0.0;  // max supported terrain incline, radians
    bool compatible = false;
};

struct InclineReport {
    double kappa_terrain_max = 0.0;  // radians
    std::vector<InclineEntry> entries;
};

// Max over triangles of arctan |grad z_T|.
double max_terrain_incline(const TerrainMesh& mesh);

// arctan(h_min / delta); throws ConfigError when delta <= 0.
double supported_incline(const UAVSpec& spec);

// Compatibility audit: each UAV is compatible iff kappa_i > kappa_T_max.
InclineReport incline_audit(const TerrainMesh& mesh, const std::vector<UAVSpec>& fleet);

}  // namespace uvs
