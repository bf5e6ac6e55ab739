#pragma once

// P1 finite elements for one geometry sample: assembly of the pulled-back
// surface problem and of the coupled bulk-surface problem, Jacobi-CG, and
// error norms of lifted discrete functions.

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <vector>

#include "stochfem/mesh.hpp"
#include "stochfem/pullback.hpp"
#include "stochfem/quadrature.hpp"
#include "stochfem/random_field.hpp"

namespace stochfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

template <int Dim>
using ScalarField = std::function<double(const Vec<Dim>&)>;
template <int Dim>
using VectorField = std::function<Vec<Dim>(const Vec<Dim>&)>;

struct SparseSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    /// Surface problem: every DOF is a mesh vertex. Coupled problem: DOFs
    /// [0, bulk_dofs) are bulk vertices, followed by the boundary loop.
    int bulk_dofs = 0;
    int surface_dofs = 0;
};

struct FemSolution {
    Eigen::VectorXd values;
    int iterations = 0;
    double residual = 0.0;           // |b - A x|
    double relative_residual = 0.0;  // |b - A x| / |b|
};

inline constexpr double kDefaultCgTolerance = 1e-10;

/// Sample-independent assembly data for a surface mesh: lifted quadrature
/// points, weights, facet gradients and the sparsity pattern. Reused across
/// Monte-Carlo samples.
class SurfaceAssembler {
public:
    explicit SurfaceAssembler(const SurfaceMesh& mesh);

    SparseSystem assemble(const SurfaceHeightSample& s, const ScalarField<3>& load) const;

    /// Lifted points a(x_q), triangle-major.
    const std::vector<Vec3>& lifted_points() const { return lifted_; }
    /// Assembly with load values already evaluated at lifted_points().
    SparseSystem assemble(const SurfaceHeightSample& s, const std::vector<double>& load_values) const;

    const SurfaceMesh& mesh() const { return *mesh_; }

private:
    const SurfaceMesh* mesh_;
    std::vector<Vec3> lifted_;
    std::vector<double> weights_;                 // rule weight * 2 * area
    std::vector<std::array<Vec3, 3>> gradients_;  // facet gradients of the hats
    SparseMatrix pattern_;
    std::vector<std::array<int, 9>> scatter_;
};

/// The same for the coupled problem on a disk mesh.
class CoupledAssembler {
public:
    CoupledAssembler(const BulkMesh& mesh, double alpha, double beta);

    SparseSystem assemble(const BoundaryHeightSample& s, const ScalarField<2>& f,
                          const ScalarField<2>& f_gamma) const;
    SparseSystem assemble(const BoundaryHeightSample& s, const std::vector<double>& f_values,
                          const std::vector<double>& f_gamma_values) const;

    /// G_h(x_q) for every bulk quadrature point, triangle-major.
    const std::vector<Vec2>& bulk_points() const { return bulk_lifted_; }
    /// a(x_q) for every boundary quadrature point, edge-major.
    const std::vector<Vec2>& boundary_points() const { return boundary_lifted_; }

    const BulkMesh& mesh() const { return *mesh_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

private:
    const BulkMesh* mesh_;
    double alpha_;
    double beta_;
    int n_bulk_;
    std::vector<Vec2> bulk_lifted_;
    std::vector<double> bulk_weights_;
    std::vector<std::array<Vec2, 3>> bulk_gradients_;
    std::vector<Vec2> boundary_lifted_;
    std::vector<double> boundary_weights_;
    std::vector<Vec2> edge_gradients_;  // gradient of the second hat; the first is its negative
    SparseMatrix pattern_;
    std::vector<std::array<int, 9>> bulk_scatter_;
    std::vector<std::array<int, 16>> edge_scatter_;  // (bulk, surface) x (bulk, surface) blocks
};

SparseSystem assemble_surface(const SurfaceMesh& mesh, const SurfaceHeightSample& s, const ScalarField<3>& load);

SparseSystem assemble_coupled(const BulkMesh& mesh, const BoundaryHeightSample& s, const ScalarField<2>& f,
                              const ScalarField<2>& f_gamma, double alpha, double beta);

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
FemSolution solve_cg(const SparseSystem& system, double tol = kDefaultCgTolerance);

struct ErrorNorms {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double h1 = 0.0;
};

/// Norms over S^2 of u_h^l - exact; exact_grad must return the tangential
/// gradient on S^2.
ErrorNorms error_norms(const SurfaceMesh& mesh, const Eigen::VectorXd& values, const ScalarField<3>& exact,
                       const VectorField<3>& exact_grad);

/// Norms over the unit disk of the bulk component (values indexed by vertex).
ErrorNorms bulk_error_norms(const BulkMesh& mesh, const Eigen::VectorXd& bulk_values, const ScalarField<2>& exact,
                            const VectorField<2>& exact_grad);

/// Lifted boundary quadrature points a(x_q), edge-major. Used to tabulate
/// reference values for boundary_error_norms.
std::vector<Vec2> boundary_quadrature_points(const BulkMesh& mesh);

/// Norms over S^1 of the surface component (values indexed by loop position).
ErrorNorms boundary_error_norms(const BulkMesh& mesh, const Eigen::VectorXd& surface_values,
                                const ScalarField<2>& exact, const VectorField<2>& exact_grad);

/// As above with exact values and tangential gradients tabulated at
/// boundary_quadrature_points(mesh).
ErrorNorms boundary_error_norms(const BulkMesh& mesh, const Eigen::VectorXd& surface_values,
                                const std::vector<double>& exact_values, const std::vector<Vec2>& exact_grads);

/// |det grad G_h| at x in triangle tri, by central differences.
double lift_jacobian_determinant(const BulkMesh& mesh, int tri, const Vec2& x);

} // namespace stochfem
