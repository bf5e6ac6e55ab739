#include "stochfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace stochfem {

namespace {

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

template <class Point>
double triangle_angle_min(const Point& a, const Point& b, const Point& c)
{
    auto angle = [](const Point& p, const Point& q, const Point& r) {
        const Point u = q - p, v = r - p;
        return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
    };
    return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)}) * 180.0 / std::numbers::pi;
}

template <class Mesh>
double edge_length_extreme(const Mesh& mesh, bool want_max)
{
    double best = want_max ? 0.0 : std::numeric_limits<double>::infinity();
    for (const Triangle& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const double len = (mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]).norm();
            best = want_max ? std::max(best, len) : std::min(best, len);
        }
    }
    return best;
}

void finalize_surface(SurfaceMesh& mesh)
{
    mesh.facet_normals.clear();
    mesh.facet_normals.reserve(mesh.triangles.size());
    for (const Triangle& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3 n = (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).normalized();
        mesh.facet_normals.push_back(n);
    }
    mesh.h_max = mesh_size(mesh);
}

} // namespace

SurfaceMesh build_icosphere(int level)
{
    if (level < 0 || level > 8) throw std::invalid_argument("build_icosphere: level must lie in [0, 8]");
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    SurfaceMesh mesh;
    const double raw[12][3] = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (const auto& v : raw) mesh.vertices.push_back(Vec3(v[0], v[1], v[2]).normalized());
    mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                      {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int round = 0; round < level; ++round) {
        std::map<std::uint64_t, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = edge_key(a, b);
            if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
            const int id = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back((0.5 * (mesh.vertices[a] + mesh.vertices[b])).normalized());
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Triangle> refined;
        refined.reserve(mesh.triangles.size() * 4);
        for (const Triangle& t : mesh.triangles) {
            const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            refined.push_back({t[0], ab, ca});
            refined.push_back({t[1], bc, ab});
            refined.push_back({t[2], ca, bc});
            refined.push_back({ab, bc, ca});
        }
        mesh.triangles = std::move(refined);
    }
    finalize_surface(mesh);
    return mesh;
}

BulkMesh build_disk_mesh(int level)
{
    if (level < 0 || level > 9) throw std::invalid_argument("build_disk_mesh: level must lie in [0, 9]");
    BulkMesh mesh;
    mesh.vertices.push_back(Vec2::Zero());
    for (int k = 0; k < 6; ++k) {
        const double a = k * std::numbers::pi / 3.0;
        mesh.vertices.push_back(Vec2(std::cos(a), std::sin(a)));
    }
    for (int k = 0; k < 6; ++k) mesh.triangles.push_back({0, 1 + k, 1 + (k + 1) % 6});

    auto boundary_edge_keys = [](const std::vector<Triangle>& tris) {
        std::map<std::uint64_t, int> count;
        for (const Triangle& t : tris)
            for (int k = 0; k < 3; ++k) ++count[edge_key(t[k], t[(k + 1) % 3])];
        return count;
    };

    for (int round = 0; round < level; ++round) {
        const auto counts = boundary_edge_keys(mesh.triangles);
        std::map<std::uint64_t, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = edge_key(a, b);
            if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
            const int id = static_cast<int>(mesh.vertices.size());
            Vec2 m = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
            if (counts.at(key) == 1) m.normalize();
            mesh.vertices.push_back(m);
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Triangle> refined;
        refined.reserve(mesh.triangles.size() * 4);
        for (const Triangle& t : mesh.triangles) {
            const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            refined.push_back({t[0], ab, ca});
            refined.push_back({t[1], bc, ab});
            refined.push_back({t[2], ca, bc});
            refined.push_back({ab, bc, ca});
        }
        mesh.triangles = std::move(refined);
    }

    // Oriented boundary edges (those seen by exactly one triangle).
    const auto counts = boundary_edge_keys(mesh.triangles);
    std::map<int, int> next_on_boundary;
    for (const Triangle& t : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            if (counts.at(edge_key(a, b)) == 1) next_on_boundary[a] = b;
        }
    }
    const int start = next_on_boundary.begin()->first;
    int v = start;
    do {
        mesh.boundary_loop.push_back(v);
        v = next_on_boundary.at(v);
    } while (v != start);
    if (mesh.boundary_loop.size() != next_on_boundary.size()) {
        throw std::logic_error("build_disk_mesh: boundary is not a single closed loop");
    }
    const int nb = static_cast<int>(mesh.boundary_loop.size());
    mesh.surface_index.assign(mesh.vertices.size(), -1);
    for (int k = 0; k < nb; ++k) {
        mesh.surface_index[mesh.boundary_loop[k]] = k;
        mesh.boundary_edges.push_back({mesh.boundary_loop[k], mesh.boundary_loop[(k + 1) % nb]});
    }

    mesh.kinds.assign(mesh.triangles.size(), SimplexKind::Interior);
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        Triangle& t = mesh.triangles[i];
        int on_boundary = 0;
        for (int k : t) on_boundary += mesh.surface_index[k] >= 0 ? 1 : 0;
        if (on_boundary == 3) throw std::logic_error("build_disk_mesh: triangle with three boundary vertices");
        if (on_boundary < 2) continue;
        while (mesh.surface_index[t[0]] >= 0) std::rotate(t.begin(), t.begin() + 1, t.end());
        if (counts.at(edge_key(t[1], t[2])) != 1) {
            throw std::logic_error("build_disk_mesh: boundary vertices of a simplex not joined by a boundary edge");
        }
        mesh.kinds[i] = SimplexKind::Boundary;
    }
    mesh.h_max = mesh_size(mesh);
    return mesh;
}

BoundaryTriangle boundary_triangle(const BulkMesh& mesh, int tri)
{
    if (tri < 0 || tri >= static_cast<int>(mesh.triangles.size())) {
        throw std::out_of_range("boundary_triangle: triangle index out of range");
    }
    const Triangle& t = mesh.triangles[tri];
    return {mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]};
}

namespace {

Vec2 bulk_lift_unchecked(const Vec2& x, const BoundaryTriangle& K, double l1, double l2)
{
    const double s = l1 + l2;
    if (s < 1e-12) return x;
    const Vec2 pe = (l1 * K.v1 + l2 * K.v2) / s;
    return x + s * (pe / pe.norm() - pe);
}

} // namespace

Vec2 bulk_lift(const Vec2& x, const BoundaryTriangle& K)
{
    Mat2 T;
    T.col(0) = K.v1 - K.v0;
    T.col(1) = K.v2 - K.v0;
    const Vec2 l = T.inverse() * (x - K.v0);
    const double l1 = l[0], l2 = l[1], l0 = 1.0 - l1 - l2;
    if (std::min({l0, l1, l2}) < -1e-10) throw OutsideTriangle("bulk_lift: point lies outside the triangle");
    return bulk_lift_unchecked(x, K, l1, l2);
}

Vec2 lift_point(const BulkMesh& mesh, int tri, const Vec2& x)
{
    if (mesh.kinds[tri] == SimplexKind::Interior) return x;
    const BoundaryTriangle K = boundary_triangle(mesh, tri);
    Mat2 T;
    T.col(0) = K.v1 - K.v0;
    T.col(1) = K.v2 - K.v0;
    const Vec2 l = T.inverse() * (x - K.v0);
    return bulk_lift_unchecked(x, K, l[0], l[1]);
}

double mesh_size(const SurfaceMesh& mesh) { return edge_length_extreme(mesh, true); }
double mesh_size(const BulkMesh& mesh) { return edge_length_extreme(mesh, true); }
double min_edge_length(const SurfaceMesh& mesh) { return edge_length_extreme(mesh, false); }
double min_edge_length(const BulkMesh& mesh) { return edge_length_extreme(mesh, false); }

double min_angle_degrees(const SurfaceMesh& mesh)
{
    double best = 180.0;
    for (const Triangle& t : mesh.triangles)
        best = std::min(best, triangle_angle_min(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
    return best;
}

double min_angle_degrees(const BulkMesh& mesh)
{
    double best = 180.0;
    for (const Triangle& t : mesh.triangles)
        best = std::min(best, triangle_angle_min(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
    return best;
}

double total_area(const SurfaceMesh& mesh)
{
    double a = 0.0;
    for (const Triangle& t : mesh.triangles) {
        const Vec3& p = mesh.vertices[t[0]];
        a += 0.5 * (mesh.vertices[t[1]] - p).cross(mesh.vertices[t[2]] - p).norm();
    }
    return a;
}

double total_area(const BulkMesh& mesh)
{
    double a = 0.0;
    for (const Triangle& t : mesh.triangles) {
        const Vec2 u = mesh.vertices[t[1]] - mesh.vertices[t[0]];
        const Vec2 v = mesh.vertices[t[2]] - mesh.vertices[t[0]];
        a += 0.5 * (u[0] * v[1] - u[1] * v[0]);
    }
    return a;
}

} // namespace stochfem
