#pragma once

// Convergence-table output (CSV and console) and legacy VTK export.

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

#include "stochfem/experiments.hpp"
#include "stochfem/mesh.hpp"

namespace stochfem {

/// Shortest decimal representation that round-trips.
std::string format_double(double v);

/// CSV text: header h,M,error_<g>,eoc_h_<g>,eoc_M_<g> for every group g.
/// Undefined eoc entries are empty fields.
std::string table_csv(const ConvergenceTable& table);

/// Column-aligned rendering in the order h, M, error, eoc(h), eoc(M).
std::string table_console(const ConvergenceTable& table);

/// Writes table_csv to path (parent directories created). Throws IoError.
void write_table_csv(const ConvergenceTable& table, const std::filesystem::path& path);

/// POLYDATA triangle surface with one vertex scalar field.
void write_vtk_surface(const std::filesystem::path& path, const std::vector<Vec3>& points,
                       const std::vector<Triangle>& triangles, const Eigen::VectorXd& scalars,
                       const std::string& scalar_name, const std::string& title);

/// POLYDATA closed polyline in the plane z = 0 with one vertex scalar field.
void write_vtk_curve(const std::filesystem::path& path, const std::vector<Vec2>& points,
                     const Eigen::VectorXd& scalars, const std::string& scalar_name, const std::string& title);

/// UNSTRUCTURED_GRID of planar triangles with one vertex scalar field.
void write_vtk_bulk(const std::filesystem::path& path, const std::vector<Vec2>& points,
                    const std::vector<Triangle>& triangles, const Eigen::VectorXd& scalars,
                    const std::string& scalar_name, const std::string& title);

/// Structural content of a legacy ASCII VTK file.
struct VtkSummary {
    std::string dataset;          // POLYDATA or UNSTRUCTURED_GRID
    std::vector<Vec3> points;
    std::vector<std::vector<int>> cells;  // POLYGONS, LINES or CELLS
    std::vector<double> scalars;
};

VtkSummary read_vtk(const std::filesystem::path& path);

} // namespace stochfem
