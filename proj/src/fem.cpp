#include "stochfem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stochfem {

namespace {

struct Facet3 {
    std::array<Vec3, 3> gradients;
    double area;
};

Facet3 facet_geometry(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& n)
{
    const Vec3 cross = (b - a).cross(c - a);
    const double two_area = cross.norm();
    Facet3 f;
    f.area = 0.5 * two_area;
    f.gradients[0] = n.cross(c - b) / two_area;
    f.gradients[1] = n.cross(a - c) / two_area;
    f.gradients[2] = n.cross(b - a) / two_area;
    return f;
}

struct Facet2 {
    std::array<Vec2, 3> gradients;
    double area;
};

Vec2 rotate_ccw(const Vec2& e) { return Vec2(-e[1], e[0]); }

Facet2 facet_geometry(const Vec2& a, const Vec2& b, const Vec2& c)
{
    const Vec2 u = b - a, v = c - a;
    const double two_area = u[0] * v[1] - u[1] * v[0];
    if (two_area <= 0.0) throw std::logic_error("facet_geometry: triangle is not counter-clockwise");
    Facet2 f;
    f.area = 0.5 * two_area;
    f.gradients[0] = rotate_ccw(c - b) / two_area;
    f.gradients[1] = rotate_ccw(a - c) / two_area;
    f.gradients[2] = rotate_ccw(b - a) / two_area;
    return f;
}

using Triplets = std::vector<Eigen::Triplet<double, int>>;

SparseMatrix build_pattern(int n, const Triplets& entries)
{
    SparseMatrix m(n, n);
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return m;
}

int pattern_position(const SparseMatrix& m, int row, int col)
{
    const int* begin = m.innerIndexPtr() + m.outerIndexPtr()[row];
    const int* end = m.innerIndexPtr() + m.outerIndexPtr()[row + 1];
    const int* it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) throw std::logic_error("pattern_position: entry missing from pattern");
    return static_cast<int>(it - m.innerIndexPtr());
}

SparseSystem empty_system(const SparseMatrix& pattern, int bulk_dofs, int surface_dofs)
{
    SparseSystem sys;
    sys.matrix = pattern;
    std::fill(sys.matrix.valuePtr(), sys.matrix.valuePtr() + sys.matrix.nonZeros(), 0.0);
    sys.rhs = Eigen::VectorXd::Zero(pattern.rows());
    sys.bulk_dofs = bulk_dofs;
    sys.surface_dofs = surface_dofs;
    return sys;
}

template <int Dim>
std::vector<double> tabulate(const ScalarField<Dim>& f, const std::vector<Vec<Dim>>& points)
{
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = f(points[i]);
    return out;
}

void require_size(std::size_t got, std::size_t want, const char* what)
{
    if (got != want) {
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(want) + " values, got " +
                                    std::to_string(got));
    }
}

} // namespace

// ---------------------------------------------------------------- surface

SurfaceAssembler::SurfaceAssembler(const SurfaceMesh& mesh) : mesh_(&mesh)
{
    const TriangleRule& rule = triangle_rule_degree4();
    const std::size_t nt = mesh.triangles.size(), nq = rule.size();
    lifted_.reserve(nt * nq);
    weights_.reserve(nt * nq);
    gradients_.reserve(nt);
    Triplets entries;
    entries.reserve(nt * 9);
    for (std::size_t t = 0; t < nt; ++t) {
        const Triangle& tri = mesh.triangles[t];
        const Vec3 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]], &c = mesh.vertices[tri[2]];
        const Facet3 f = facet_geometry(a, b, c, mesh.facet_normals[t]);
        gradients_.push_back(f.gradients);
        for (std::size_t q = 0; q < nq; ++q) {
            const auto& l = rule.points[q];
            lifted_.push_back(closest_point<3>(l[0] * a + l[1] * b + l[2] * c));
            weights_.push_back(rule.weights[q] * 2.0 * f.area);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) entries.emplace_back(tri[i], tri[j], 0.0);
    }
    pattern_ = build_pattern(static_cast<int>(mesh.vertices.size()), entries);
    scatter_.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const Triangle& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) scatter_[t][3 * i + j] = pattern_position(pattern_, tri[i], tri[j]);
    }
}

SparseSystem SurfaceAssembler::assemble(const SurfaceHeightSample& s, const ScalarField<3>& load) const
{
    return assemble(s, tabulate<3>(load, lifted_));
}

SparseSystem SurfaceAssembler::assemble(const SurfaceHeightSample& s, const std::vector<double>& load_values) const
{
    require_size(load_values.size(), lifted_.size(), "SurfaceAssembler::assemble");
    const TriangleRule& rule = triangle_rule_degree4();
    const std::size_t nq = rule.size();
    const int n = static_cast<int>(mesh_->vertices.size());
    SparseSystem sys = empty_system(pattern_, n, 0);
    double* values = sys.matrix.valuePtr();

    for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
        const Triangle& tri = mesh_->triangles[t];
        const auto& g = gradients_[t];
        double local[9] = {};
        double rhs[3] = {};
        for (std::size_t q = 0; q < nq; ++q) {
            const std::size_t idx = t * nq + q;
            const Vec3& p = lifted_[idx];
            const SurfaceCoefficients<3> c = surface_coefficients_from_height<3>(p, eval_height(s, p));
            const double w = weights_[idx];
            const double wm = w * c.sqrt_g;
            const auto& l = rule.points[q];
            std::array<Vec3, 3> dg;
            for (int i = 0; i < 3; ++i) dg[i] = c.D * g[i];
            for (int i = 0; i < 3; ++i) {
                rhs[i] += wm * load_values[idx] * l[i];
                for (int j = 0; j < 3; ++j) local[3 * i + j] += w * dg[i].dot(g[j]) + wm * l[i] * l[j];
            }
        }
        for (int k = 0; k < 9; ++k) values[scatter_[t][k]] += local[k];
        for (int i = 0; i < 3; ++i) sys.rhs[tri[i]] += rhs[i];
    }
    return sys;
}

SparseSystem assemble_surface(const SurfaceMesh& mesh, const SurfaceHeightSample& s, const ScalarField<3>& load)
{
    return SurfaceAssembler(mesh).assemble(s, load);
}

// ---------------------------------------------------------------- coupled

CoupledAssembler::CoupledAssembler(const BulkMesh& mesh, double alpha, double beta)
    : mesh_(&mesh), alpha_(alpha), beta_(beta), n_bulk_(static_cast<int>(mesh.vertices.size()))
{
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("CoupledAssembler: alpha and beta must be > 0");
    const TriangleRule& rule = triangle_rule_degree4();
    const SegmentRule& seg = segment_rule_gauss3();
    const std::size_t nt = mesh.triangles.size(), ne = mesh.boundary_edges.size();
    const int n_surface = static_cast<int>(mesh.boundary_loop.size());

    Triplets entries;
    for (std::size_t t = 0; t < nt; ++t) {
        const Triangle& tri = mesh.triangles[t];
        const Vec2 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]], &c = mesh.vertices[tri[2]];
        const Facet2 f = facet_geometry(a, b, c);
        bulk_gradients_.push_back(f.gradients);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& l = rule.points[q];
            bulk_lifted_.push_back(lift_point(mesh, static_cast<int>(t), l[0] * a + l[1] * b + l[2] * c));
            bulk_weights_.push_back(rule.weights[q] * 2.0 * f.area);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) entries.emplace_back(tri[i], tri[j], 0.0);
    }
    for (std::size_t e = 0; e < ne; ++e) {
        const Vec2& a = mesh.vertices[mesh.boundary_edges[e][0]];
        const Vec2& b = mesh.vertices[mesh.boundary_edges[e][1]];
        const double len = (b - a).norm();
        edge_gradients_.push_back((b - a) / (len * len));
        for (std::size_t q = 0; q < seg.size(); ++q) {
            boundary_lifted_.push_back(closest_point<2>(seg.points[q][0] * a + seg.points[q][1] * b));
            boundary_weights_.push_back(seg.weights[q] * len);
        }
        const int blk[2] = {mesh.boundary_edges[e][0], mesh.boundary_edges[e][1]};
        const int srf[2] = {n_bulk_ + static_cast<int>(e), n_bulk_ + static_cast<int>((e + 1) % ne)};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                entries.emplace_back(blk[i], srf[j], 0.0);
                entries.emplace_back(srf[i], blk[j], 0.0);
                entries.emplace_back(srf[i], srf[j], 0.0);
            }
    }
    pattern_ = build_pattern(n_bulk_ + n_surface, entries);

    bulk_scatter_.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const Triangle& tri = mesh.triangles[t];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) bulk_scatter_[t][3 * i + j] = pattern_position(pattern_, tri[i], tri[j]);
    }
    edge_scatter_.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        // Local DOF order: bulk a, bulk b, surface a, surface b.
        const int dofs[4] = {mesh.boundary_edges[e][0], mesh.boundary_edges[e][1], n_bulk_ + static_cast<int>(e),
                             n_bulk_ + static_cast<int>((e + 1) % ne)};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) edge_scatter_[e][4 * i + j] = pattern_position(pattern_, dofs[i], dofs[j]);
    }
}

SparseSystem CoupledAssembler::assemble(const BoundaryHeightSample& s, const ScalarField<2>& f,
                                        const ScalarField<2>& f_gamma) const
{
    return assemble(s, tabulate<2>(f, bulk_lifted_), tabulate<2>(f_gamma, boundary_lifted_));
}

SparseSystem CoupledAssembler::assemble(const BoundaryHeightSample& s, const std::vector<double>& f_values,
                                        const std::vector<double>& f_gamma_values) const
{
    require_size(f_values.size(), bulk_lifted_.size(), "CoupledAssembler::assemble (bulk load)");
    require_size(f_gamma_values.size(), boundary_lifted_.size(), "CoupledAssembler::assemble (surface load)");
    const TriangleRule& rule = triangle_rule_degree4();
    const SegmentRule& seg = segment_rule_gauss3();
    const std::size_t nq = rule.size(), ns = seg.size();
    const std::size_t ne = mesh_->boundary_edges.size();
    SparseSystem sys = empty_system(pattern_, n_bulk_, static_cast<int>(ne));
    double* values = sys.matrix.valuePtr();

    for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
        const Triangle& tri = mesh_->triangles[t];
        const auto& g = bulk_gradients_[t];
        double local[9] = {};
        double rhs[3] = {};
        for (std::size_t q = 0; q < nq; ++q) {
            const std::size_t idx = t * nq + q;
            const BulkCoefficients c = bulk_coefficients(bulk_lifted_[idx], s);
            const double w = alpha_ * bulk_weights_[idx];
            const double wm = w * c.sqrt_g;
            const auto& l = rule.points[q];
            for (int i = 0; i < 3; ++i) {
                const Vec2 dg = c.D_bulk * g[i];
                rhs[i] += wm * f_values[idx] * l[i];
                for (int j = 0; j < 3; ++j) local[3 * i + j] += w * dg.dot(g[j]) + wm * l[i] * l[j];
            }
        }
        for (int k = 0; k < 9; ++k) values[bulk_scatter_[t][k]] += local[k];
        for (int i = 0; i < 3; ++i) sys.rhs[tri[i]] += rhs[i];
    }

    const double ab = alpha_ * beta_;
    for (std::size_t e = 0; e < ne; ++e) {
        const Vec2 ge = edge_gradients_[e];
        const Vec2 g[2] = {-ge, ge};
        double mass[4] = {};
        double stiff[4] = {};
        double rhs[2] = {};
        for (std::size_t q = 0; q < ns; ++q) {
            const std::size_t idx = e * ns + q;
            const SurfaceCoefficients<2> c = surface_coefficients(boundary_lifted_[idx], s);
            const double w = boundary_weights_[idx];
            const double wm = w * c.sqrt_g;
            const auto& l = seg.points[q];
            for (int i = 0; i < 2; ++i) {
                rhs[i] += beta_ * wm * f_gamma_values[idx] * l[i];
                for (int j = 0; j < 2; ++j) {
                    mass[2 * i + j] += wm * l[i] * l[j];
                    stiff[2 * i + j] += w * (c.D * g[i]).dot(g[j]);
                }
            }
        }
        const auto& sc = edge_scatter_[e];
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const double m = mass[2 * i + j];
                values[sc[4 * i + j]] += alpha_ * alpha_ * m;
                values[sc[4 * i + (j + 2)]] -= ab * m;
                values[sc[4 * (i + 2) + j]] -= ab * m;
                values[sc[4 * (i + 2) + (j + 2)]] += beta_ * (stiff[2 * i + j] + m) + beta_ * beta_ * m;
            }
        }
        sys.rhs[n_bulk_ + static_cast<int>(e)] += rhs[0];
        sys.rhs[n_bulk_ + static_cast<int>((e + 1) % ne)] += rhs[1];
    }
    return sys;
}

SparseSystem assemble_coupled(const BulkMesh& mesh, const BoundaryHeightSample& s, const ScalarField<2>& f,
                              const ScalarField<2>& f_gamma, double alpha, double beta)
{
    return CoupledAssembler(mesh, alpha, beta).assemble(s, f, f_gamma);
}

// ---------------------------------------------------------------- solver

FemSolution solve_cg(const SparseSystem& system, double tol)
{
    if (!(tol >= 1e-14 && tol <= 1e-2)) throw std::invalid_argument("solve_cg: tol must lie in [1e-14, 1e-2]");
    const SparseMatrix& A = system.matrix;
    const Eigen::Index n = A.rows();
    const Eigen::VectorXd& b = system.rhs;
    const Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();

    FemSolution sol;
    sol.values = Eigen::VectorXd::Zero(n);
    const double b_norm = b.norm();
    if (b_norm == 0.0) return sol;

    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd Ap(n);
    double rz = r.dot(z);
    const long max_iter = 10 * static_cast<long>(n);
    double r_norm = b_norm;
    long it = 0;
    while (r_norm > tol * b_norm) {
        if (it >= max_iter) {
            throw NoConvergence("solve_cg: no convergence after " + std::to_string(max_iter) + " iterations");
        }
        Ap.noalias() = A * p;
        const double curvature = p.dot(Ap);
        if (!(curvature > 0.0)) throw NoConvergence("solve_cg: non-positive curvature direction");
        const double step = rz / curvature;
        sol.values.noalias() += step * p;
        r.noalias() -= step * Ap;
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
        r_norm = r.norm();
        ++it;
    }
    sol.iterations = static_cast<int>(it);
    sol.residual = (b - A * sol.values).norm();
    sol.relative_residual = sol.residual / b_norm;
    return sol;
}

// ---------------------------------------------------------------- errors

namespace {

ErrorNorms finish(double l2_sq, double semi_sq)
{
    ErrorNorms e;
    e.l2 = std::sqrt(l2_sq);
    e.h1_semi = std::sqrt(semi_sq);
    e.h1 = std::sqrt(l2_sq + semi_sq);
    return e;
}

} // namespace

ErrorNorms error_norms(const SurfaceMesh& mesh, const Eigen::VectorXd& values, const ScalarField<3>& exact,
                       const VectorField<3>& exact_grad)
{
    require_size(static_cast<std::size_t>(values.size()), mesh.vertices.size(), "error_norms");
    const TriangleRule& rule = triangle_rule_degree4();
    double l2 = 0.0, semi = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        const Vec3 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]], &c = mesh.vertices[tri[2]];
        const Vec3& n = mesh.facet_normals[t];
        const Facet3 f = facet_geometry(a, b, c, n);
        const Vec3 grad_h = values[tri[0]] * f.gradients[0] + values[tri[1]] * f.gradients[1] +
                            values[tri[2]] * f.gradients[2];
        const Mat3 Ph = tangent_projection<3>(n);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& l = rule.points[q];
            const Vec3 x = l[0] * a + l[1] * b + l[2] * c;
            const Vec3 p = closest_point<3>(x);
            const double w = rule.weights[q] * 2.0 * f.area * lift_area_ratio<3>(x, n);
            const double uh = l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]];
            const double e0 = uh - exact(p);
            const Vec3 e1 = grad_h - Ph * exact_grad(p);
            l2 += w * e0 * e0;
            semi += w * e1.squaredNorm();
        }
    }
    return finish(l2, semi);
}

double lift_jacobian_determinant(const BulkMesh& mesh, int tri, const Vec2& x)
{
    if (mesh.kinds[tri] == SimplexKind::Interior) return 1.0;
    constexpr double eta = 1e-6;
    Mat2 J;
    for (int j = 0; j < 2; ++j) {
        Vec2 xp = x, xm = x;
        xp[j] += eta;
        xm[j] -= eta;
        J.col(j) = (lift_point(mesh, tri, xp) - lift_point(mesh, tri, xm)) / (2.0 * eta);
    }
    return std::abs(J.determinant());
}

ErrorNorms bulk_error_norms(const BulkMesh& mesh, const Eigen::VectorXd& bulk_values, const ScalarField<2>& exact,
                            const VectorField<2>& exact_grad)
{
    if (static_cast<std::size_t>(bulk_values.size()) < mesh.vertices.size()) {
        throw std::invalid_argument("bulk_error_norms: too few values");
    }
    const TriangleRule& rule = triangle_rule_degree4();
    double l2 = 0.0, semi = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        const Vec2 &a = mesh.vertices[tri[0]], &b = mesh.vertices[tri[1]], &c = mesh.vertices[tri[2]];
        const Facet2 f = facet_geometry(a, b, c);
        const Vec2 grad_h = bulk_values[tri[0]] * f.gradients[0] + bulk_values[tri[1]] * f.gradients[1] +
                            bulk_values[tri[2]] * f.gradients[2];
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& l = rule.points[q];
            const Vec2 x = l[0] * a + l[1] * b + l[2] * c;
            const int ti = static_cast<int>(t);
            const Vec2 y = lift_point(mesh, ti, x);
            const double w = rule.weights[q] * 2.0 * f.area * lift_jacobian_determinant(mesh, ti, x);
            const double uh = l[0] * bulk_values[tri[0]] + l[1] * bulk_values[tri[1]] + l[2] * bulk_values[tri[2]];
            const double e0 = uh - exact(y);
            const Vec2 e1 = grad_h - exact_grad(y);
            l2 += w * e0 * e0;
            semi += w * e1.squaredNorm();
        }
    }
    return finish(l2, semi);
}

std::vector<Vec2> boundary_quadrature_points(const BulkMesh& mesh)
{
    const SegmentRule& seg = segment_rule_gauss3();
    std::vector<Vec2> out;
    out.reserve(mesh.boundary_edges.size() * seg.size());
    for (const Edge& e : mesh.boundary_edges) {
        const Vec2 &a = mesh.vertices[e[0]], &b = mesh.vertices[e[1]];
        for (const auto& l : seg.points) out.push_back(closest_point<2>(l[0] * a + l[1] * b));
    }
    return out;
}

ErrorNorms boundary_error_norms(const BulkMesh& mesh, const Eigen::VectorXd& surface_values,
                                const ScalarField<2>& exact, const VectorField<2>& exact_grad)
{
    const std::vector<Vec2> pts = boundary_quadrature_points(mesh);
    std::vector<double> vals(pts.size());
    std::vector<Vec2> grads(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        vals[i] = exact(pts[i]);
        grads[i] = exact_grad(pts[i]);
    }
    return boundary_error_norms(mesh, surface_values, vals, grads);
}

ErrorNorms boundary_error_norms(const BulkMesh& mesh, const Eigen::VectorXd& surface_values,
                                const std::vector<double>& exact_values, const std::vector<Vec2>& exact_grads)
{
    const SegmentRule& seg = segment_rule_gauss3();
    const std::size_t ne = mesh.boundary_edges.size();
    require_size(static_cast<std::size_t>(surface_values.size()), ne, "boundary_error_norms");
    require_size(exact_values.size(), ne * seg.size(), "boundary_error_norms (values)");
    require_size(exact_grads.size(), ne * seg.size(), "boundary_error_norms (gradients)");
    double l2 = 0.0, semi = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        const Vec2 &a = mesh.vertices[mesh.boundary_edges[e][0]], &b = mesh.vertices[mesh.boundary_edges[e][1]];
        const double len = (b - a).norm();
        const Vec2 tangent = (b - a) / len;
        const Vec2 normal(tangent[1], -tangent[0]);
        const double ua = surface_values[e], ub = surface_values[(e + 1) % ne];
        const Vec2 grad_h = (ub - ua) / len * tangent;
        for (std::size_t q = 0; q < seg.size(); ++q) {
            const auto& l = seg.points[q];
            const Vec2 x = l[0] * a + l[1] * b;
            const std::size_t idx = e * seg.size() + q;
            const double w = seg.weights[q] * len * lift_area_ratio<2>(x, normal);
            const double e0 = l[0] * ua + l[1] * ub - exact_values[idx];
            const Vec2 e1 = grad_h - tangent.dot(exact_grads[idx]) * tangent;
            l2 += w * e0 * e0;
            semi += w * e1.squaredNorm();
        }
    }
    return finish(l2, semi);
}

} // namespace stochfem
