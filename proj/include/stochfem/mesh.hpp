#pragma once

// Polyhedral computational domains: icosphere triangulations of S^2, disk
// triangulations whose boundary polygon is inscribed in S^1, and the bulk
// lift G_h from the polygonal disk onto the unit disk.

#include <array>
#include <cstdint>
#include <vector>

#include "stochfem/geometry.hpp"

namespace stochfem {

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

struct SurfaceMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;  // counter-clockwise seen from outside
    std::vector<Vec3> facet_normals;  // outward unit normals
    double h_max = 0.0;
};

enum class SimplexKind : std::uint8_t { Interior, Boundary };

struct BulkMesh {
    std::vector<Vec2> vertices;
    /// Counter-clockwise. Boundary simplices are rotated so that local vertex
    /// 0 is the interior vertex and (1, 2) is the boundary edge.
    std::vector<Triangle> triangles;
    std::vector<SimplexKind> kinds;
    /// Boundary loop, counter-clockwise: boundary_edges[k] = (loop[k], loop[k+1]).
    std::vector<Edge> boundary_edges;
    std::vector<int> boundary_loop;
    /// Vertex index -> position in boundary_loop, or -1 for interior vertices.
    std::vector<int> surface_index;
    double h_max = 0.0;

    bool is_boundary_vertex(int v) const { return surface_index[v] >= 0; }
};

/// Icosahedron refined `level` times by 4-way midpoint subdivision with
/// radial projection of the new vertices. level <= 8.
SurfaceMesh build_icosphere(int level);

/// Hexagon fan around the origin refined `level` times; midpoints of boundary
/// edges are projected onto S^1. level <= 9.
BulkMesh build_disk_mesh(int level);

struct BoundaryTriangle {
    Vec2 v0;  // interior vertex
    Vec2 v1;  // boundary edge
    Vec2 v2;
};

BoundaryTriangle boundary_triangle(const BulkMesh& mesh, int tri);

/// Lambda_{h,K}: identity on the two straight edges, chord onto arc.
Vec2 bulk_lift(const Vec2& x, const BoundaryTriangle& K);

/// G_h restricted to triangle `tri`: bulk_lift on boundary simplices and the
/// identity elsewhere.
Vec2 lift_point(const BulkMesh& mesh, int tri, const Vec2& x);

double mesh_size(const SurfaceMesh& mesh);
double mesh_size(const BulkMesh& mesh);

double min_edge_length(const SurfaceMesh& mesh);
double min_edge_length(const BulkMesh& mesh);

/// Smallest interior angle over all triangles, in degrees.
double min_angle_degrees(const SurfaceMesh& mesh);
double min_angle_degrees(const BulkMesh& mesh);

double total_area(const SurfaceMesh& mesh);
double total_area(const BulkMesh& mesh);

} // namespace stochfem
