#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "uavsearch/geom.hpp"
#include "uavsearch/terrain.hpp"

namespace uvs {

// Nodal real field on a TerrainMesh.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(const TerrainMesh* mesh, double fill = 0.0)
        : mesh_(mesh), values_(mesh->node_count(), fill) {}
    ScalarField(const TerrainMesh* mesh, std::vector<double> values);

    const TerrainMesh& mesh() const { return *mesh_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double operator[](int i) const { return values_[i]; }
    double& operator[](int i) { return values_[i]; }
    int size() const { return static_cast<int>(values_.size()); }

private:
    const TerrainMesh* mesh_ = nullptr;
    std::vector<double> values_;
};

struct HedacParams {
    double alpha = 1.0;  // smoothness, > 0
    double beta = 1.0;   // stability, > 0

    void validate() const;
};

// Linear (P1) FEM operators on a triangle mesh: stiffness K, consistent mass
// M, and the lumped weight vector L = M*1 used for integrals.
class FemSystem {
public:
    explicit FemSystem(const TerrainMesh& mesh);

    const TerrainMesh& mesh() const { return *mesh_; }
    const Eigen::SparseMatrix<double>& stiffness() const { return K_; }
    const Eigen::SparseMatrix<double>& mass() const { return M_; }

    // Integral over the domain of the P1 interpolant of the nodal field.
    double integral(const ScalarField& f) const;
    // L2 norm sqrt(f' M f) of the interpolant.
    double l2_norm(const ScalarField& f) const;

private:
    const TerrainMesh* mesh_;
    Eigen::SparseMatrix<double> K_;
    Eigen::SparseMatrix<double> M_;
    Eigen::VectorXd lumped_;
};

// Solves alpha * lap(u) = beta * u - m with zero-Neumann boundary:
// (alpha K + beta M) u = M m. The system matrix is factorized once.
class HedacSolver {
public:
    HedacSolver(std::shared_ptr<const FemSystem> fem, HedacParams params);

    const FemSystem& fem() const { return *fem_; }
    const HedacParams& params() const { return params_; }

    ScalarField solve(const ScalarField& m) const;

private:
    std::shared_ptr<const FemSystem> fem_;
    HedacParams params_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factorization_;
};

// Initial target-probability description.
struct GaussianBlob {
    Vec2 center;
    double sigma = 1.0;
    double weight = 1.0;
};
struct UniformDistribution {};
struct GaussianMixture {
    std::vector<GaussianBlob> blobs;
};
struct NodalFile {
    std::string path;  // CSV: node_id,x,y,value
};
using InitialDistribution = std::variant<UniformDistribution, GaussianMixture, NodalFile>;

// Non-negative nodal field normalized to unit FEM integral.
ScalarField init_probability(const InitialDistribution& spec, const FemSystem& fem);

// c' = c + dt * psi (rectangle-rule accumulation of the coverage integral).
void accumulate_coverage(ScalarField& c, const std::vector<std::pair<int, double>>& psi_nodal,
                         double dt);

// m = m0 .* exp(-c).
ScalarField undetected_probability(const ScalarField& m0, const ScalarField& c);

// eta = 1 - integral(m).
double survey_accomplishment(const ScalarField& m, const FemSystem& fem);

// Normalized gradient of the P1 interpolant at p; returns `fallback` when the
// gradient magnitude is below 1e-14. Throws DomainError outside the domain.
Vec2 gradient_direction(const ScalarField& u, const Vec2& p, const Vec2& fallback);

// Nodal snapshot "node_id,x,y,value".
void write_field_csv(const ScalarField& f, const std::string& path);

}  // namespace uvs
