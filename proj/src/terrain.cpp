#include "uavsearch/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "uavsearch/errors.hpp"
#include "uavsearch/motion.hpp"

namespace uvs {

namespace {

inline std::pair<int, int> sorted_edge(int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

struct PairHash {
    size_t operator()(const std::pair<int, int>& e) const {
        return std::hash<uint64_t>()((static_cast<uint64_t>(e.first) << 32) ^
                                     static_cast<uint32_t>(e.second));
    }
};

}  // namespace

TerrainMesh::TerrainMesh(std::vector<MeshNode> nodes, std::vector<std::array<int, 3>> triangles,
                         std::vector<std::pair<int, int>> tagged_boundary_lines,
                         std::vector<int> line_tags)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)) {
    validate_and_orient(tagged_boundary_lines, line_tags);
    build_grids();
}

void TerrainMesh::validate_and_orient(const std::vector<std::pair<int, int>>& tagged_lines,
                                      const std::vector<int>& line_tags) {
    const int n = node_count();
    if (n < 3) throw ValidationError("mesh has fewer than 3 nodes");
    if (triangles_.empty()) throw ValidationError("mesh has no triangle elements");

    tri_area_.resize(triangles_.size());
    total_area_ = 0.0;
    for (size_t t = 0; t < triangles_.size(); ++t) {
        auto& tri = triangles_[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= n)
                throw ValidationError("triangle " + std::to_string(t) + " references node index " +
                                      std::to_string(tri[k]) + " out of range [0, " +
                                      std::to_string(n) + ")");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw ValidationError("triangle " + std::to_string(t) + " repeats a node");
        const Vec2 a{nodes_[tri[0]].x, nodes_[tri[0]].y};
        const Vec2 b{nodes_[tri[1]].x, nodes_[tri[1]].y};
        const Vec2 c{nodes_[tri[2]].x, nodes_[tri[2]].y};
        double twice_area = (b - a).cross(c - a);
        if (twice_area < 0.0) {
            std::swap(tri[1], tri[2]);
            twice_area = -twice_area;
        }
        if (twice_area <= 0.0)
            throw ValidationError("triangle " + std::to_string(t) + " is degenerate (zero area)");
        tri_area_[t] = 0.5 * twice_area;
        total_area_ += tri_area_[t];
    }

    // Edge incidence: interior edges belong to exactly 2 triangles, boundary to 1.
    std::unordered_map<std::pair<int, int>, int, PairHash> edge_count;
    edge_count.reserve(triangles_.size() * 2);
    for (const auto& tri : triangles_)
        for (int k = 0; k < 3; ++k) edge_count[sorted_edge(tri[k], tri[(k + 1) % 3])]++;

    boundary_edges_.clear();
    for (const auto& [edge, count] : edge_count) {
        if (count == 1)
            boundary_edges_.push_back(edge);
        else if (count != 2)
            throw ValidationError("edge (" + std::to_string(edge.first) + ", " +
                                  std::to_string(edge.second) + ") is shared by " +
                                  std::to_string(count) + " triangles");
    }
    std::sort(boundary_edges_.begin(), boundary_edges_.end());

    // Line elements in the file must coincide with the topological boundary.
    std::unordered_map<std::pair<int, int>, int, PairHash> edge_tag;
    for (size_t i = 0; i < tagged_lines.size(); ++i) {
        const auto e = sorted_edge(tagged_lines[i].first, tagged_lines[i].second);
        if (e.first < 0 || e.second >= n)
            throw ValidationError("boundary line references node index out of range");
        if (!std::binary_search(boundary_edges_.begin(), boundary_edges_.end(), e))
            throw ValidationError("boundary line (" + std::to_string(e.first) + ", " +
                                  std::to_string(e.second) +
                                  ") is not an edge of exactly one triangle");
        edge_tag[e] = i < line_tags.size() ? line_tags[i] : -1;
    }

    // Walk boundary edges into closed loops; every boundary node must have
    // exactly two incident boundary edges.
    std::unordered_map<int, std::vector<int>> node_to_edges;
    for (size_t e = 0; e < boundary_edges_.size(); ++e) {
        node_to_edges[boundary_edges_[e].first].push_back(static_cast<int>(e));
        node_to_edges[boundary_edges_[e].second].push_back(static_cast<int>(e));
    }
    for (const auto& [node, edges] : node_to_edges)
        if (edges.size() != 2)
            throw ValidationError("boundary node " + std::to_string(node) + " has " +
                                  std::to_string(edges.size()) +
                                  " incident boundary edges (loop not closed or pinched)");

    std::vector<char> visited(boundary_edges_.size(), 0);
    loops_.clear();
    for (size_t start = 0; start < boundary_edges_.size(); ++start) {
        if (visited[start]) continue;
        BoundaryLoop loop;
        int edge = static_cast<int>(start);
        int node = boundary_edges_[start].first;
        do {
            visited[edge] = 1;
            loop.edges.push_back(edge);
            const auto& [a, b] = boundary_edges_[edge];
            const int next_node = (a == node) ? b : a;
            loop.signed_area += (nodes_[node].x * nodes_[next_node].y -
                                 nodes_[next_node].x * nodes_[node].y) * 0.5;
            const auto& incident = node_to_edges[next_node];
            const int next_edge = (incident[0] == edge) ? incident[1] : incident[0];
            node = next_node;
            edge = next_edge;
        } while (edge != static_cast<int>(start));
        if (!edge_tag.empty()) {
            auto it = edge_tag.find(boundary_edges_[loop.edges.front()]);
            if (it != edge_tag.end()) loop.physical_tag = it->second;
        }
        loops_.push_back(std::move(loop));
    }

    // The loop enclosing the largest area is the outer boundary, the rest are
    // no-fly holes.
    size_t outer = 0;
    for (size_t i = 1; i < loops_.size(); ++i)
        if (std::abs(loops_[i].signed_area) > std::abs(loops_[outer].signed_area)) outer = i;
    for (size_t i = 0; i < loops_.size(); ++i) loops_[i].is_hole = (i != outer);

    z_min_ = std::numeric_limits<double>::infinity();
    z_max_ = -z_min_;
    for (const auto& nd : nodes_) {
        if (!std::isfinite(nd.x) || !std::isfinite(nd.y) || !std::isfinite(nd.z))
            throw ValidationError("mesh node with non-finite coordinate");
        z_min_ = std::min(z_min_, nd.z);
        z_max_ = std::max(z_max_, nd.z);
    }
}

void TerrainMesh::build_grids() {
    bbox_lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    bbox_hi_ = {-bbox_lo_.x, -bbox_lo_.y};
    for (const auto& nd : nodes_) {
        bbox_lo_.x = std::min(bbox_lo_.x, nd.x);
        bbox_lo_.y = std::min(bbox_lo_.y, nd.y);
        bbox_hi_.x = std::max(bbox_hi_.x, nd.x);
        bbox_hi_.y = std::max(bbox_hi_.y, nd.y);
    }
    const double w = std::max(bbox_hi_.x - bbox_lo_.x, 1e-9);
    const double h = std::max(bbox_hi_.y - bbox_lo_.y, 1e-9);
    // Aim for ~2 triangles per cell.
    const double target_cells = std::max(1.0, triangles_.size() / 2.0);
    cell_ = std::max(std::sqrt(w * h / target_cells), 1e-9);
    gx_ = std::max(1, static_cast<int>(std::ceil(w / cell_)));
    gy_ = std::max(1, static_cast<int>(std::ceil(h / cell_)));
    tri_cells_.assign(static_cast<size_t>(gx_) * gy_, {});
    node_cells_.assign(static_cast<size_t>(gx_) * gy_, {});
    edge_cells_.assign(static_cast<size_t>(gx_) * gy_, {});

    auto cell_x = [&](double x) {
        return std::clamp(static_cast<int>((x - bbox_lo_.x) / cell_), 0, gx_ - 1);
    };
    auto cell_y = [&](double y) {
        return std::clamp(static_cast<int>((y - bbox_lo_.y) / cell_), 0, gy_ - 1);
    };

    for (size_t t = 0; t < triangles_.size(); ++t) {
        double lx = 1e300, ly = 1e300, hx = -1e300, hy = -1e300;
        for (int k = 0; k < 3; ++k) {
            const auto& nd = nodes_[triangles_[t][k]];
            lx = std::min(lx, nd.x); hx = std::max(hx, nd.x);
            ly = std::min(ly, nd.y); hy = std::max(hy, nd.y);
        }
        for (int cy = cell_y(ly); cy <= cell_y(hy); ++cy)
            for (int cx = cell_x(lx); cx <= cell_x(hx); ++cx)
                tri_cells_[static_cast<size_t>(cy) * gx_ + cx].push_back(static_cast<int32_t>(t));
    }
    for (size_t i = 0; i < nodes_.size(); ++i)
        node_cells_[static_cast<size_t>(cell_y(nodes_[i].y)) * gx_ + cell_x(nodes_[i].x)]
            .push_back(static_cast<int32_t>(i));
    for (size_t e = 0; e < boundary_edges_.size(); ++e) {
        const auto& a = nodes_[boundary_edges_[e].first];
        const auto& b = nodes_[boundary_edges_[e].second];
        for (int cy = cell_y(std::min(a.y, b.y)); cy <= cell_y(std::max(a.y, b.y)); ++cy)
            for (int cx = cell_x(std::min(a.x, b.x)); cx <= cell_x(std::max(a.x, b.x)); ++cx)
                edge_cells_[static_cast<size_t>(cy) * gx_ + cx].push_back(static_cast<int32_t>(e));
    }
}

std::array<double, 3> TerrainMesh::barycentric(int t, const Vec2& p) const {
    const auto& tri = triangles_[t];
    const Vec2 a{nodes_[tri[0]].x, nodes_[tri[0]].y};
    const Vec2 b{nodes_[tri[1]].x, nodes_[tri[1]].y};
    const Vec2 c{nodes_[tri[2]].x, nodes_[tri[2]].y};
    const double inv = 1.0 / (b - a).cross(c - a);
    const double l1 = (p - a).cross(c - a) * inv;
    const double l2 = (b - a).cross(p - a) * inv;
    return {1.0 - l1 - l2, l1, l2};
}

int TerrainMesh::locate(const Vec2& p) const {
    if (p.x < bbox_lo_.x || p.x > bbox_hi_.x || p.y < bbox_lo_.y || p.y > bbox_hi_.y) return -1;
    const int cx = std::clamp(static_cast<int>((p.x - bbox_lo_.x) / cell_), 0, gx_ - 1);
    const int cy = std::clamp(static_cast<int>((p.y - bbox_lo_.y) / cell_), 0, gy_ - 1);
    // Cell lists are ascending, so the first hit is the lowest triangle index.
    for (int32_t t : tri_cells_[static_cast<size_t>(cy) * gx_ + cx]) {
        const auto l = barycentric(t, p);
        const double tol = -1e-12;
        if (l[0] >= tol && l[1] >= tol && l[2] >= tol) return t;
    }
    return -1;
}

Vec2 TerrainMesh::elevation_gradient(int t) const {
    const auto& tri = triangles_[t];
    const auto& n0 = nodes_[tri[0]];
    const auto& n1 = nodes_[tri[1]];
    const auto& n2 = nodes_[tri[2]];
    const double inv2a = 1.0 / (2.0 * tri_area_[t]);
    // grad of linear shape functions times nodal z
    const double gx = ((n1.y - n2.y) * n0.z + (n2.y - n0.y) * n1.z + (n0.y - n1.y) * n2.z) * inv2a;
    const double gy = ((n2.x - n1.x) * n0.z + (n0.x - n2.x) * n1.z + (n1.x - n0.x) * n2.z) * inv2a;
    return {gx, gy};
}

double TerrainMesh::interpolate(int t, const Vec2& p, const std::vector<double>& nodal) const {
    const auto l = barycentric(t, p);
    const auto& tri = triangles_[t];
    return l[0] * nodal[tri[0]] + l[1] * nodal[tri[1]] + l[2] * nodal[tri[2]];
}

double TerrainMesh::elevation_at(const Vec2& p) const {
    const int t = locate(p);
    if (t < 0)
        throw DomainError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") lies outside the search domain");
    const auto l = barycentric(t, p);
    const auto& tri = triangles_[t];
    return l[0] * nodes_[tri[0]].z + l[1] * nodes_[tri[1]].z + l[2] * nodes_[tri[2]].z;
}

std::optional<double> TerrainMesh::try_elevation_at(const Vec2& p) const {
    const int t = locate(p);
    if (t < 0) return std::nullopt;
    const auto l = barycentric(t, p);
    const auto& tri = triangles_[t];
    return l[0] * nodes_[tri[0]].z + l[1] * nodes_[tri[1]].z + l[2] * nodes_[tri[2]].z;
}

void TerrainMesh::nodes_in_box(const Vec2& lo, const Vec2& hi, std::vector<int>& out) const {
    out.clear();
    if (hi.x < bbox_lo_.x || lo.x > bbox_hi_.x || hi.y < bbox_lo_.y || lo.y > bbox_hi_.y) return;
    auto cell_x = [&](double x) {
        return std::clamp(static_cast<int>((x - bbox_lo_.x) / cell_), 0, gx_ - 1);
    };
    auto cell_y = [&](double y) {
        return std::clamp(static_cast<int>((y - bbox_lo_.y) / cell_), 0, gy_ - 1);
    };
    for (int cy = cell_y(lo.y); cy <= cell_y(hi.y); ++cy)
        for (int cx = cell_x(lo.x); cx <= cell_x(hi.x); ++cx)
            for (int32_t i : node_cells_[static_cast<size_t>(cy) * gx_ + cx]) {
                const auto& nd = nodes_[i];
                if (nd.x >= lo.x && nd.x <= hi.x && nd.y >= lo.y && nd.y <= hi.y)
                    out.push_back(i);
            }
}

double TerrainMesh::boundary_distance(const Vec2& p, double radius) const {
    auto cell_x = [&](double x) {
        return std::clamp(static_cast<int>((x - bbox_lo_.x) / cell_), 0, gx_ - 1);
    };
    auto cell_y = [&](double y) {
        return std::clamp(static_cast<int>((y - bbox_lo_.y) / cell_), 0, gy_ - 1);
    };
    double best = std::numeric_limits<double>::infinity();
    const int x0 = cell_x(p.x - radius), x1 = cell_x(p.x + radius);
    const int y0 = cell_y(p.y - radius), y1 = cell_y(p.y + radius);
    for (int cy = y0; cy <= y1; ++cy)
        for (int cx = x0; cx <= x1; ++cx)
            for (int32_t e : edge_cells_[static_cast<size_t>(cy) * gx_ + cx]) {
                const auto& [ia, ib] = boundary_edges_[e];
                const double d = point_segment_distance(
                    p, {nodes_[ia].x, nodes_[ia].y}, {nodes_[ib].x, nodes_[ib].y});
                best = std::min(best, d);
            }
    return best <= radius ? best : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Gmsh MSH 2.2 ASCII subset
// ---------------------------------------------------------------------------

TerrainMesh load_mesh(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open mesh file: " + path);

    std::string line;
    int line_no = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(f, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(path + ":" + std::to_string(line_no) + ": " + what);
    };

    std::vector<MeshNode> nodes;
    std::unordered_map<long, int> node_index;  // file id -> dense index
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::pair<int, int>> lines_elems;
    std::vector<int> line_tags;
    bool saw_nodes = false, saw_elements = false;

    while (next_line()) {
        if (line == "$MeshFormat") {
            if (!next_line()) throw fail("truncated $MeshFormat");
            std::istringstream ss(line);
            double version = 0.0;
            int file_type = 0;
            ss >> version >> file_type;
            if (!ss || version < 2.0 || version >= 3.0)
                throw fail("unsupported MSH version (expected 2.x ASCII): " + line);
            if (file_type != 0) throw fail("binary MSH files are not supported");
            if (!next_line() || line != "$EndMeshFormat") throw fail("missing $EndMeshFormat");
        } else if (line == "$Nodes") {
            saw_nodes = true;
            if (!next_line()) throw fail("truncated $Nodes");
            long count = 0;
            try {
                count = std::stol(line);
            } catch (...) {
                throw fail("invalid node count: " + line);
            }
            nodes.reserve(count);
            for (long i = 0; i < count; ++i) {
                if (!next_line()) throw fail("unexpected end of file in $Nodes");
                std::istringstream ss(line);
                long id;
                MeshNode nd;
                ss >> id >> nd.x >> nd.y >> nd.z;
                if (!ss) throw fail("malformed node line: " + line);
                if (!node_index.emplace(id, static_cast<int>(nodes.size())).second)
                    throw fail("duplicate node id " + std::to_string(id));
                nodes.push_back(nd);
            }
            if (!next_line() || line != "$EndNodes") throw fail("missing $EndNodes");
        } else if (line == "$Elements") {
            saw_elements = true;
            if (!next_line()) throw fail("truncated $Elements");
            long count = 0;
            try {
                count = std::stol(line);
            } catch (...) {
                throw fail("invalid element count: " + line);
            }
            auto resolve = [&](long id) {
                auto it = node_index.find(id);
                if (it == node_index.end())
                    throw fail("element references unknown node id " + std::to_string(id));
                return it->second;
            };
            for (long i = 0; i < count; ++i) {
                if (!next_line()) throw fail("unexpected end of file in $Elements");
                std::istringstream ss(line);
                long id;
                int type = 0, ntags = 0;
                ss >> id >> type >> ntags;
                if (!ss) throw fail("malformed element line: " + line);
                int physical = -1;
                for (int k = 0; k < ntags; ++k) {
                    int tag;
                    ss >> tag;
                    if (k == 0) physical = tag;
                }
                if (type == 2) {
                    long a, b, c;
                    ss >> a >> b >> c;
                    if (!ss) throw fail("malformed triangle element: " + line);
                    triangles.push_back({resolve(a), resolve(b), resolve(c)});
                } else if (type == 1) {
                    long a, b;
                    ss >> a >> b;
                    if (!ss) throw fail("malformed line element: " + line);
                    lines_elems.emplace_back(resolve(a), resolve(b));
                    line_tags.push_back(physical);
                } else if (type == 15) {
                    // point elements carry no surface information
                } else {
                    throw fail("unsupported element type " + std::to_string(type) +
                               " (only 2D triangle meshes are accepted)");
                }
            }
            if (!next_line() || line != "$EndElements") throw fail("missing $EndElements");
        } else if (!line.empty() && line[0] == '$') {
            // skip unknown sections ($PhysicalNames etc.)
            const std::string terminator = "$End" + line.substr(1);
            while (next_line() && line != terminator) {}
        }
    }
    if (!saw_nodes) throw ParseError(path + ": no $Nodes section");
    if (!saw_elements) throw ParseError(path + ": no $Elements section");

    return TerrainMesh(std::move(nodes), std::move(triangles), std::move(lines_elems),
                       std::move(line_tags));
}

// ---------------------------------------------------------------------------
// ESRI ASCII grid
// ---------------------------------------------------------------------------

DemRaster::DemRaster(int ncols, int nrows, double xll, double yll, double cellsize,
                     double nodata, std::vector<double> values)
    : ncols_(ncols), nrows_(nrows), xll_(xll), yll_(yll), cellsize_(cellsize),
      nodata_(nodata), values_(std::move(values)) {
    if (ncols_ <= 0 || nrows_ <= 0) throw ParseError("raster with non-positive dimensions");
    if (cellsize_ <= 0.0) throw ParseError("raster cellsize must be positive");
    if (values_.size() != static_cast<size_t>(ncols_) * nrows_)
        throw ParseError("raster value count does not match ncols*nrows");
}

std::optional<double> DemRaster::elevation(const Vec2& p) const {
    // Cell centers: x = xll + (col + 0.5) * cs, y = yll + (nrows - 1 - row + 0.5) * cs.
    const double fx = (p.x - xll_) / cellsize_ - 0.5;
    const double fy = (yll_ + nrows_ * cellsize_ - p.y) / cellsize_ - 0.5;  // row coordinate
    if (fx < -0.5 || fx > ncols_ - 0.5 || fy < -0.5 || fy > nrows_ - 0.5) return std::nullopt;
    const int c0 = std::clamp(static_cast<int>(std::floor(fx)), 0, ncols_ - 1);
    const int r0 = std::clamp(static_cast<int>(std::floor(fy)), 0, nrows_ - 1);
    const int c1 = std::min(c0 + 1, ncols_ - 1);
    const int r1 = std::min(r0 + 1, nrows_ - 1);
    const double tx = std::clamp(fx - c0, 0.0, 1.0);
    const double ty = std::clamp(fy - r0, 0.0, 1.0);
    const double v00 = at(r0, c0), v01 = at(r0, c1), v10 = at(r1, c0), v11 = at(r1, c1);
    if (v00 == nodata_ || v01 == nodata_ || v10 == nodata_ || v11 == nodata_)
        return std::nullopt;
    return (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
}

DemRaster load_dem(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open raster file: " + path);

    int ncols = -1, nrows = -1;
    double xll = 0.0, yll = 0.0, cellsize = 0.0;
    double nodata = -9999.0;
    bool have_xll = false, have_yll = false, have_cs = false;

    std::string key;
    while (f >> key) {
        std::string lower;
        for (char c : key) lower += static_cast<char>(std::tolower(c));
        if (lower == "ncols") f >> ncols;
        else if (lower == "nrows") f >> nrows;
        else if (lower == "xllcorner") { f >> xll; have_xll = true; }
        else if (lower == "yllcorner") { f >> yll; have_yll = true; }
        else if (lower == "cellsize") { f >> cellsize; have_cs = true; }
        else if (lower == "nodata_value") f >> nodata;
        else break;  // first data token
        if (!f) throw ParseError(path + ": malformed header near '" + key + "'");
        if (ncols > 0 && nrows > 0 && have_xll && have_yll && have_cs) {
            // header may still contain NODATA_value; peek the next token
            auto pos = f.tellg();
            std::string peek;
            if (!(f >> peek)) throw ParseError(path + ": no raster values");
            std::string lp;
            for (char c : peek) lp += static_cast<char>(std::tolower(c));
            if (lp == "nodata_value") {
                f >> nodata;
                if (!f) throw ParseError(path + ": malformed NODATA_value");
            } else {
                f.seekg(pos);
            }
            break;
        }
    }
    if (ncols <= 0 || nrows <= 0 || !have_xll || !have_yll || !have_cs)
        throw ParseError(path + ": incomplete ESRI ASCII header");

    std::vector<double> values;
    values.reserve(static_cast<size_t>(ncols) * nrows);
    double v;
    while (f >> v) values.push_back(v);
    if (values.size() != static_cast<size_t>(ncols) * nrows)
        throw ParseError(path + ": expected " + std::to_string(static_cast<size_t>(ncols) * nrows) +
                         " values, found " + std::to_string(values.size()));
    return DemRaster(ncols, nrows, xll, yll, cellsize, nodata, std::move(values));
}

// ---------------------------------------------------------------------------
// Terrain facade
// ---------------------------------------------------------------------------

Terrain::Terrain(TerrainMesh mesh, std::optional<DemRaster> dem)
    : mesh_(std::move(mesh)), dem_(std::move(dem)) {}

double Terrain::elevation(const Vec2& p) const {
    if (auto z = mesh_.try_elevation_at(p)) return *z;
    if (dem_) {
        if (auto z = dem_->elevation(p)) return *z;
    }
    // Off-mesh fallback (holes, numerically grazing probes): nearest node.
    double best = std::numeric_limits<double>::infinity();
    double z = 0.0;
    for (const auto& nd : mesh_.nodes()) {
        const double d2 = (Vec2{nd.x, nd.y} - p).squared_norm();
        if (d2 < best) {
            best = d2;
            z = nd.z;
        }
    }
    return z;
}

std::optional<double> Terrain::los_elevation(const Vec2& p) const {
    if (dem_) return dem_->elevation(p);
    return mesh_.try_elevation_at(p);
}

double Terrain::los_step() const {
    const double cap = 10.0;
    return dem_ ? std::min(dem_->cellsize(), cap) : cap;
}

// ---------------------------------------------------------------------------
// Incline audit
// ---------------------------------------------------------------------------

double max_terrain_incline(const TerrainMesh& mesh) {
    double max_slope = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        max_slope = std::max(max_slope, mesh.elevation_gradient(t).norm());
    return std::atan(max_slope);
}

double supported_incline(const UAVSpec& spec) {
    if (spec.delta <= 0.0)
        throw ConfigError("UAV '" + spec.name + "': clearance delta must be positive");
    return std::atan2(spec.h_min, spec.delta);
}

InclineReport incline_audit(const TerrainMesh& mesh, const std::vector<UAVSpec>& fleet) {
    InclineReport report;
    report.kappa_terrain_max = max_terrain_incline(mesh);
    for (const auto& spec : fleet) {
        InclineEntry e;
        e.uav_name = spec.name;
        e.kappa = supported_incline(spec);
        e.compatible = e.kappa > report.kappa_terrain_max;
        report.entries.push_back(std::move(e));
    }
    return report;
}

}  // namespace uvs
