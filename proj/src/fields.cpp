#include "uavsearch/fields.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uavsearch/errors.hpp"

namespace uvs {

ScalarField::ScalarField(const TerrainMesh* mesh, std::vector<double> values)
    : mesh_(mesh), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != mesh_->node_count())
        throw InternalError("scalar field size does not match mesh node count");
}

void HedacParams::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("HEDAC alpha must be positive");
    if (!(beta > 0.0)) throw ConfigError("HEDAC beta must be positive");
}

FemSystem::FemSystem(const TerrainMesh& mesh) : mesh_(&mesh) {
    const int n = mesh.node_count();
    std::vector<Eigen::Triplet<double>> k_trip, m_trip;
    k_trip.reserve(mesh.triangle_count() * 9);
    m_trip.reserve(mesh.triangle_count() * 9);

    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const auto& n0 = mesh.nodes()[tri[0]];
        const auto& n1 = mesh.nodes()[tri[1]];
        const auto& n2 = mesh.nodes()[tri[2]];
        const double area = mesh.triangle_area(t);

        // P1 shape-function gradients: grad N_i = perp(edge opposite i) / (2A).
        const double bx[3] = {n1.y - n2.y, n2.y - n0.y, n0.y - n1.y};
        const double by[3] = {n2.x - n1.x, n0.x - n2.x, n1.x - n0.x};
        const double inv4a = 1.0 / (4.0 * area);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                k_trip.emplace_back(tri[i], tri[j], (bx[i] * bx[j] + by[i] * by[j]) * inv4a);
                m_trip.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
            }
    }
    K_.resize(n, n);
    K_.setFromTriplets(k_trip.begin(), k_trip.end());
    M_.resize(n, n);
    M_.setFromTriplets(m_trip.begin(), m_trip.end());
    lumped_ = M_ * Eigen::VectorXd::Ones(n);
}

double FemSystem::integral(const ScalarField& f) const {
    double acc = 0.0;
    for (int i = 0; i < f.size(); ++i) acc += lumped_[i] * f[i];
    return acc;
}

double FemSystem::l2_norm(const ScalarField& f) const {
    const Eigen::Map<const Eigen::VectorXd> v(f.values().data(), f.size());
    return std::sqrt(v.dot(M_ * v));
}

HedacSolver::HedacSolver(std::shared_ptr<const FemSystem> fem, HedacParams params)
    : fem_(std::move(fem)), params_(params) {
    params_.validate();
    Eigen::SparseMatrix<double> a =
        params_.alpha * fem_->stiffness() + params_.beta * fem_->mass();
    factorization_.compute(a);
    if (factorization_.info() != Eigen::Success)
        throw InternalError("HEDAC system factorization failed");
}

ScalarField HedacSolver::solve(const ScalarField& m) const {
    const Eigen::Map<const Eigen::VectorXd> mv(m.values().data(), m.size());
    const Eigen::VectorXd rhs = fem_->mass() * mv;
    const Eigen::VectorXd u = factorization_.solve(rhs);
    if (factorization_.info() != Eigen::Success)
        throw InternalError("HEDAC potential solve failed");
    return {&fem_->mesh(), std::vector<double>(u.data(), u.data() + u.size())};
}

ScalarField init_probability(const InitialDistribution& spec, const FemSystem& fem) {
    const auto& mesh = fem.mesh();
    ScalarField field(&mesh);

    if (std::holds_alternative<UniformDistribution>(spec)) {
        for (int i = 0; i < field.size(); ++i) field[i] = 1.0;
    } else if (const auto* mix = std::get_if<GaussianMixture>(&spec)) {
        if (mix->blobs.empty()) throw ConfigError("gaussian mixture needs at least one component");
        for (const auto& g : mix->blobs) {
            if (g.sigma <= 0.0) throw ConfigError("gaussian sigma must be positive");
            if (g.weight <= 0.0) throw ConfigError("gaussian weight must be positive");
        }
        for (int i = 0; i < field.size(); ++i) {
            const auto& nd = mesh.nodes()[i];
            double v = 0.0;
            for (const auto& g : mix->blobs) {
                const double d2 = (Vec2{nd.x, nd.y} - g.center).squared_norm();
                v += g.weight * std::exp(-d2 / (2.0 * g.sigma * g.sigma));
            }
            field[i] = v;
        }
    } else {
        const auto& file = std::get<NodalFile>(spec);
        std::ifstream f(file.path);
        if (!f) throw ConfigError("cannot open nodal distribution file: " + file.path);
        std::string line;
        std::vector<char> seen(mesh.node_count(), 0);
        int line_no = 0;
        while (std::getline(f, line)) {
            ++line_no;
            if (line.empty() || line.rfind("node_id", 0) == 0) continue;
            std::istringstream ss(line);
            int id;
            double x, y, v;
            char comma;
            ss >> id >> comma >> x >> comma >> y >> comma >> v;
            if (!ss)
                throw ConfigError(file.path + ":" + std::to_string(line_no) +
                                  ": malformed nodal value line");
            if (id < 0 || id >= mesh.node_count())
                throw ConfigError(file.path + ":" + std::to_string(line_no) +
                                  ": node id out of range");
            field[id] = v;
            seen[id] = 1;
        }
        for (int i = 0; i < mesh.node_count(); ++i)
            if (!seen[i])
                throw ConfigError(file.path + ": missing value for node " + std::to_string(i));
    }

    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < field.size(); ++i) lo = std::min(lo, field[i]);
    if (lo < 0.0) throw ConfigError("initial probability distribution has negative values");

    const double total = fem.integral(field);
    if (total < 1e-12)
        throw ConfigError("initial probability distribution has (near-)zero mass on the domain");
    for (int i = 0; i < field.size(); ++i) field[i] /= total;
    return field;
}

void accumulate_coverage(ScalarField& c, const std::vector<std::pair<int, double>>& psi_nodal,
                         double dt) {
    for (const auto& [node, rate] : psi_nodal) {
        if (rate < 0.0) throw InternalError("negative sensing rate deposited");
        c[node] += dt * rate;
    }
}

ScalarField undetected_probability(const ScalarField& m0, const ScalarField& c) {
    if (&m0.mesh() != &c.mesh() || m0.size() != c.size())
        throw InternalError("m0 and c live on different meshes");
    ScalarField m(&m0.mesh());
    for (int i = 0; i < m.size(); ++i) m[i] = m0[i] * std::exp(-c[i]);
    return m;
}

double survey_accomplishment(const ScalarField& m, const FemSystem& fem) {
    return 1.0 - fem.integral(m);
}

Vec2 gradient_direction(const ScalarField& u, const Vec2& p, const Vec2& fallback) {
    const auto& mesh = u.mesh();
    const int t = mesh.locate(p);
    if (t < 0)
        throw DomainError("gradient query outside the search domain at (" +
                          std::to_string(p.x) + ", " + std::to_string(p.y) + ")");
    const auto& tri = mesh.triangles()[t];
    const auto& n0 = mesh.nodes()[tri[0]];
    const auto& n1 = mesh.nodes()[tri[1]];
    const auto& n2 = mesh.nodes()[tri[2]];
    const double inv2a = 1.0 / (2.0 * mesh.triangle_area(t));
    const Vec2 grad{
        ((n1.y - n2.y) * u[tri[0]] + (n2.y - n0.y) * u[tri[1]] + (n0.y - n1.y) * u[tri[2]]) * inv2a,
        ((n2.x - n1.x) * u[tri[0]] + (n0.x - n2.x) * u[tri[1]] + (n1.x - n0.x) * u[tri[2]]) * inv2a};
    const double norm = grad.norm();
    if (norm < 1e-14) return fallback;
    return grad / norm;
}

void write_field_csv(const ScalarField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write field snapshot: " + path);
    out << "node_id,x,y,value\n";
    char buf[128];
    for (int i = 0; i < f.size(); ++i) {
        const auto& nd = f.mesh().nodes()[i];
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", i, nd.x, nd.y, f[i]);
        out << buf;
    }
}

}  // namespace uvs
