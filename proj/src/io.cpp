#include "stochfem/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <type_traits>

namespace stochfem {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void require_rows(const ConvergenceTable& table)
{
    if (table.rows.empty()) throw std::invalid_argument("convergence table has no rows");
}

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

void vtk_header(std::ostream& out, const std::string& title, const char* dataset)
{
    std::string line = title;
    std::replace(line.begin(), line.end(), '\n', ' ');
    out << "# vtk DataFile Version 3.0\n" << line.substr(0, 255) << "\nASCII\nDATASET " << dataset << "\n";
}

template <class Points>
void vtk_points(std::ostream& out, const Points& points)
{
    out << "POINTS " << points.size() << " double\n";
    for (const auto& p : points) {
        double z = 0.0;
        if constexpr (std::decay_t<decltype(p)>::RowsAtCompileTime == 3) z = p[2];
        out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(z) << '\n';
    }
}

void vtk_scalars(std::ostream& out, const Eigen::VectorXd& scalars, const std::string& name, std::size_t n)
{
    if (static_cast<std::size_t>(scalars.size()) != n) {
        throw std::invalid_argument("VTK export: scalar field size does not match point count");
    }
    out << "POINT_DATA " << n << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < scalars.size(); ++i) out << format_double(scalars[i]) << '\n';
}

} // namespace

std::string table_csv(const ConvergenceTable& table)
{
    require_rows(table);
    std::ostringstream out;
    out << "h,M";
    for (const auto& g : table.groups) out << ",error_" << g << ",eoc_h_" << g << ",eoc_M_" << g;
    out << '\n';
    for (const TableRow& row : table.rows) {
        out << format_double(row.h) << ',' << row.samples;
        for (std::size_t k = 0; k < table.groups.size(); ++k) {
            out << ',' << format_double(row.errors[k]) << ',' << optional_field(row.eoc_h[k]) << ','
                << optional_field(row.eoc_M[k]);
        }
        out << '\n';
    }
    return out.str();
}

std::string table_console(const ConvergenceTable& table)
{
    require_rows(table);
    std::ostringstream out;
    out << to_string(table.problem) << ", norm " << to_string(table.norm) << ", seed " << table.seed << '\n';
    out << std::setw(10) << "h" << std::setw(7) << "M";
    for (const auto& g : table.groups) {
        out << std::setw(14) << ("error " + g) << std::setw(10) << "eoc(h)" << std::setw(10) << "eoc(M)";
    }
    out << '\n';
    auto opt = [](const std::optional<double>& v) {
        std::ostringstream s;
        if (v) s << std::fixed << std::setprecision(4) << *v;
        return s.str();
    };
    for (const TableRow& row : table.rows) {
        out << std::setw(10) << std::setprecision(5) << std::fixed << row.h << std::setw(7) << row.samples;
        for (std::size_t k = 0; k < table.groups.size(); ++k) {
            std::ostringstream e;
            e << std::scientific << std::setprecision(4) << row.errors[k];
            out << std::setw(14) << e.str() << std::setw(10) << opt(row.eoc_h[k]) << std::setw(10)
                << opt(row.eoc_M[k]);
        }
        out << '\n';
    }
    return out.str();
}

void write_table_csv(const ConvergenceTable& table, const std::filesystem::path& path)
{
    const std::string text = table_csv(table);
    std::ofstream out = open_output(path);
    out << text;
    finish_output(out, path);
}

void write_vtk_surface(const std::filesystem::path& path, const std::vector<Vec3>& points,
                       const std::vector<Triangle>& triangles, const Eigen::VectorXd& scalars,
                       const std::string& scalar_name, const std::string& title)
{
    std::ofstream out = open_output(path);
    vtk_header(out, title, "POLYDATA");
    vtk_points(out, points);
    out << "POLYGONS " << triangles.size() << ' ' << 4 * triangles.size() << '\n';
    for (const Triangle& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    vtk_scalars(out, scalars, scalar_name, points.size());
    finish_output(out, path);
}

void write_vtk_curve(const std::filesystem::path& path, const std::vector<Vec2>& points,
                     const Eigen::VectorXd& scalars, const std::string& scalar_name, const std::string& title)
{
    std::ofstream out = open_output(path);
    vtk_header(out, title, "POLYDATA");
    vtk_points(out, points);
    out << "LINES 1 " << points.size() + 2 << '\n' << points.size() + 1;
    for (std::size_t i = 0; i < points.size(); ++i) out << ' ' << i;
    out << " 0\n";
    vtk_scalars(out, scalars, scalar_name, points.size());
    finish_output(out, path);
}

void write_vtk_bulk(const std::filesystem::path& path, const std::vector<Vec2>& points,
                    const std::vector<Triangle>& triangles, const Eigen::VectorXd& scalars,
                    const std::string& scalar_name, const std::string& title)
{
    std::ofstream out = open_output(path);
    vtk_header(out, title, "UNSTRUCTURED_GRID");
    vtk_points(out, points);
    out << "CELLS " << triangles.size() << ' ' << 4 * triangles.size() << '\n';
    for (const Triangle& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << triangles.size() << '\n';
    for (std::size_t i = 0; i < triangles.size(); ++i) out << "5\n";
    vtk_scalars(out, scalars, scalar_name, points.size());
    finish_output(out, path);
}

VtkSummary read_vtk(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("# vtk DataFile Version", 0) != 0) throw IoError(path.string() + ": not a legacy VTK file");
    std::getline(in, line);  // title
    std::getline(in, line);
    if (line != "ASCII") throw IoError(path.string() + ": only ASCII files are supported");

    VtkSummary s;
    std::string key;
    auto fail = [&](const std::string& what) { return IoError(path.string() + ": " + what); };
    while (in >> key) {
        if (key == "DATASET") {
            in >> s.dataset;
        } else if (key == "POINTS") {
            std::size_t n;
            std::string type;
            in >> n >> type;
            s.points.resize(n);
            for (auto& p : s.points) in >> p[0] >> p[1] >> p[2];
        } else if (key == "POLYGONS" || key == "LINES" || key == "CELLS") {
            std::size_t n, total;
            in >> n >> total;
            std::size_t read = 0;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t k;
                in >> k;
                std::vector<int> cell(k);
                for (auto& v : cell) in >> v;
                read += k + 1;
                s.cells.push_back(std::move(cell));
            }
            if (read != total) throw fail("cell list size mismatch");
        } else if (key == "CELL_TYPES") {
            std::size_t n;
            in >> n;
            for (std::size_t i = 0; i < n; ++i) {
                int t;
                in >> t;
            }
        } else if (key == "POINT_DATA") {
            std::size_t n;
            in >> n;
            std::string scalars, name, type, lookup, table;
            in >> scalars >> name >> type;
            std::getline(in, line);  // optional component count
            in >> lookup >> table;
            s.scalars.resize(n);
            for (auto& v : s.scalars) in >> v;
        } else {
            throw fail("unexpected keyword " + key);
        }
        if (!in) throw fail("truncated file");
    }
    return s;
}

} // namespace stochfem
