#include "mesh_builder.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace uvs::testing {

StructuredMesh build_rect_mesh(double width, double height, int nx, int ny,
                               const ElevationFn& elevation,
                               const std::optional<RectHole>& hole) {
    const int nvx = nx + 1, nvy = ny + 1;
    const double dx = width / nx, dy = height / ny;

    std::vector<int> node_id(static_cast<size_t>(nvx) * nvy, -1);
    StructuredMesh mesh;

    auto cell_removed = [&](int cx, int cy) {
        if (!hole) return false;
        // remove the cell only when fully inside the hole rectangle
        const double x0 = cx * dx, y0 = cy * dy, x1 = x0 + dx, y1 = y0 + dy;
        return hole->contains(x0, y0) && hole->contains(x1, y0) && hole->contains(x0, y1) &&
               hole->contains(x1, y1);
    };
    auto get_node = [&](int ix, int iy) {
        int& id = node_id[static_cast<size_t>(iy) * nvx + ix];
        if (id < 0) {
            const double x = ix * dx, y = iy * dy;
            id = static_cast<int>(mesh.nodes.size());
            mesh.nodes.push_back({x, y, elevation(x, y)});
        }
        return id;
    };

    for (int cy = 0; cy < ny; ++cy)
        for (int cx = 0; cx < nx; ++cx) {
            if (cell_removed(cx, cy)) continue;
            const int a = get_node(cx, cy);
            const int b = get_node(cx + 1, cy);
            const int c = get_node(cx + 1, cy + 1);
            const int d = get_node(cx, cy + 1);
            // alternate the diagonal for a less anisotropic triangulation
            if ((cx + cy) % 2 == 0) {
                mesh.triangles.push_back({a, b, c});
                mesh.triangles.push_back({a, c, d});
            } else {
                mesh.triangles.push_back({a, b, d});
                mesh.triangles.push_back({b, c, d});
            }
        }
    return mesh;
}

void write_msh(const StructuredMesh& mesh, const std::string& path, bool with_boundary_lines) {
    std::ofstream out(path);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << mesh.nodes.size() << "\n";
    char buf[160];
    for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g %.17g\n", i + 1, mesh.nodes[i].x,
                      mesh.nodes[i].y, mesh.nodes[i].z);
        out << buf;
    }
    out << "$EndNodes\n";

    std::vector<std::pair<int, int>> boundary;
    std::vector<int> tags;
    if (with_boundary_lines) {
        // boundary edges = edges on exactly one triangle
        std::map<std::pair<int, int>, int> count;
        for (const auto& t : mesh.triangles)
            for (int k = 0; k < 3; ++k) {
                int a = t[k], b = t[(k + 1) % 3];
                if (a > b) std::swap(a, b);
                count[{a, b}]++;
            }
        // outer boundary edges touch the mesh bbox; everything else is a hole loop
        double lx = 1e300, ly = 1e300, hx = -1e300, hy = -1e300;
        for (const auto& n : mesh.nodes) {
            lx = std::min(lx, n.x); hx = std::max(hx, n.x);
            ly = std::min(ly, n.y); hy = std::max(hy, n.y);
        }
        auto on_bbox = [&](int i) {
            const auto& n = mesh.nodes[i];
            return n.x == lx || n.x == hx || n.y == ly || n.y == hy;
        };
        for (const auto& [e, c] : count)
            if (c == 1) {
                boundary.push_back(e);
                tags.push_back(on_bbox(e.first) && on_bbox(e.second) ? 1 : 2);
            }
    }

    out << "$Elements\n" << (mesh.triangles.size() + boundary.size()) << "\n";
    long id = 1;
    for (size_t e = 0; e < boundary.size(); ++e) {
        std::snprintf(buf, sizeof(buf), "%ld 1 2 %d %d %d %d\n", id++, tags[e], tags[e],
                      boundary[e].first + 1, boundary[e].second + 1);
        out << buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof(buf), "%ld 2 2 0 0 %d %d %d\n", id++, t[0] + 1, t[1] + 1,
                      t[2] + 1);
        out << buf;
    }
    out << "$EndElements\n";
}

void write_dem(double x0, double y0, double width, double height, double cellsize,
               const ElevationFn& elevation, const std::string& path) {
    const int ncols = static_cast<int>(width / cellsize);
    const int nrows = static_cast<int>(height / cellsize);
    std::ofstream out(path);
    out << "ncols " << ncols << "\n";
    out << "nrows " << nrows << "\n";
    out << "xllcorner " << x0 << "\n";
    out << "yllcorner " << y0 << "\n";
    out << "cellsize " << cellsize << "\n";
    out << "NODATA_value -9999\n";
    char buf[64];
    for (int r = 0; r < nrows; ++r) {
        for (int c = 0; c < ncols; ++c) {
            const double x = x0 + (c + 0.5) * cellsize;
            const double y = y0 + (nrows - 1 - r + 0.5) * cellsize;
            std::snprintf(buf, sizeof(buf), "%.10g ", elevation(x, y));
            out << buf;
        }
        out << "\n";
    }
}

std::string scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("uavsearch_tests") / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace uvs::testing
