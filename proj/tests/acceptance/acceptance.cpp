// Acceptance gate. Each invocation checks one criterion and prints a single
// PASS/FAIL line; the exit code is 0 on PASS. The expensive convergence runs
// are separate "run" subcommands that write CSV tables consumed by the
// criterion checks (wired up as ctest fixtures).
//
//   acceptance run-surface <dir>
//   acceptance run-coupled <dir>
//   acceptance check <criterion> [<dir>]
//
// criterion is one of 1, 1-magnitude, 2, 3, 4, 5, 6, 7, 8.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stochfem/cli.hpp"
#include "stochfem/experiments.hpp"
#include "stochfem/fem.hpp"
#include "stochfem/io.hpp"
#include "stochfem/mesh.hpp"
#include "stochfem/pullback.hpp"
#include "stochfem/random_field.hpp"

namespace fs = std::filesystem;
using namespace stochfem;

namespace {

constexpr std::uint64_t kSeed = 42;

// Coupled runs use a geometry amplitude and blending width for which the
// bulk map does not fold (see the notes in README).
constexpr SampleParams kCoupledParams{0.05, 0.1, 0.8};

struct Band {
    double lo;
    double hi;
    bool contains(double v) const { return std::isfinite(v) && v >= lo && v <= hi; }
};

constexpr Band kL2Order{1.7, 2.3};
constexpr Band kH1Order{0.85, 1.15};
constexpr Band kMcOrder{-0.6, -0.35};

int report(const std::string& id, const std::string& title, bool pass, const std::string& detail)
{
    std::cout << "CRITERION " << id << " " << title << ": " << (pass ? "PASS" : "FAIL") << " (" << detail << ")"
              << std::endl;
    return pass ? 0 : 1;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

int hardware_threads()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentOptions options_for(const SampleParams& params, const fs::path& dir)
{
    ExperimentOptions opt;
    opt.params = params;
    opt.threads = hardware_threads();
    opt.cache_dir = dir / "cache";
    opt.progress = [](const std::string& m) { std::cerr << m << std::endl; };
    return opt;
}

// ------------------------------------------------------------------ tables

using CsvTable = std::vector<std::map<std::string, std::string>>;

CsvTable read_csv(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string() + " (run the fixture first)");
    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!line.empty() && line.back() == ',') out.emplace_back();
        return out;
    };
    std::string line;
    std::getline(in, line);
    const auto header = split(line);
    CsvTable rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = i < cells.size() ? cells[i] : "";
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path.string() + " has no rows");
    return rows;
}

double cell(const std::map<std::string, std::string>& row, const std::string& key)
{
    const auto it = row.find(key);
    if (it == row.end() || it->second.empty()) return std::nan("");
    return std::stod(it->second);
}

std::string errors_column(const CsvTable& t, const std::string& group)
{
    std::string s;
    for (const auto& r : t) s += (s.empty() ? "" : " ") + fmt(cell(r, "error_" + group));
    return s;
}

int check_order(const std::string& id, const std::string& title, const fs::path& csv,
                const std::vector<std::string>& groups, Band h_band, bool check_m)
{
    const CsvTable t = read_csv(csv);
    bool pass = true;
    std::string detail;
    for (const auto& g : groups) {
        const double eh = cell(t.back(), "eoc_h_" + g);
        const double em = cell(t.back(), "eoc_M_" + g);
        pass = pass && h_band.contains(eh) && (!check_m || kMcOrder.contains(em));
        if (!detail.empty()) detail += "; ";
        detail += g + ": errors " + errors_column(t, g) + ", final eoc_h " + fmt(eh);
        if (check_m) detail += ", eoc_M " + fmt(em);
    }
    return report(id, title, pass, detail);
}

// ------------------------------------------------------------- fixtures

int run_surface(const fs::path& dir)
{
    fs::create_directories(dir);
    const std::vector<Schedule> schedules{balanced_schedule(ProblemKind::Surface, NormKind::L2, 3, 6, kSeed),
                                          balanced_schedule(ProblemKind::Surface, NormKind::H1, 3, 6, kSeed)};
    const auto tables = run_convergence(schedules, options_for(SampleParams{}, dir));
    write_table_csv(tables[0], dir / "surface_l2.csv");
    write_table_csv(tables[1], dir / "surface_h1.csv");
    std::cout << table_console(tables[0]) << '\n' << table_console(tables[1]);
    return 0;
}

int run_coupled(const fs::path& dir)
{
    fs::create_directories(dir);
    const std::vector<Schedule> schedules{balanced_schedule(ProblemKind::BulkSurface, NormKind::L2, 2, 5, kSeed),
                                          balanced_schedule(ProblemKind::BulkSurface, NormKind::H1, 2, 5, kSeed)};
    const auto tables = run_convergence(schedules, options_for(kCoupledParams, dir));
    write_table_csv(tables[0], dir / "coupled_l2.csv");
    write_table_csv(tables[1], dir / "coupled_h1.csv");
    std::cout << table_console(tables[0]) << '\n' << table_console(tables[1]);
    return 0;
}

// ----------------------------------------------------------- criterion 1b

int check_magnitude(const fs::path& dir)
{
    const std::vector<double> reference{0.7768, 0.3875, 0.1060, 0.02673};
    const CsvTable t = read_csv(dir / "surface_l2.csv");
    bool pass = t.size() == reference.size();
    std::string detail;
    for (std::size_t i = 0; i < std::min(t.size(), reference.size()); ++i) {
        const double ratio = cell(t[i], "error_l2") / reference[i];
        pass = pass && ratio >= 1.0 / 3.0 && ratio <= 3.0;
        detail += (i ? " " : "ratios to the reference column: ") + fmt(ratio);
    }
    return report("1-magnitude", "surface L2 error magnitude within factor 3", pass, detail);
}

// ------------------------------------------------------------ criterion 5

std::vector<Vec3> random_sphere_points(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    std::vector<Vec3> pts;
    while (static_cast<int>(pts.size()) < n) {
        const Vec3 v(g(rng), g(rng), g(rng));
        if (v.norm() > 1e-3) pts.push_back(v.normalized());
    }
    return pts;
}

std::vector<Vec2> random_circle_points(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        const double t = u(rng);
        pts.emplace_back(std::cos(t), std::sin(t));
    }
    return pts;
}

// Tangential gradient of phi(p) = (1 + h(p)) p by central differences of
// phi along geodesic-free chart curves p + eta t -> a(p + eta t).
template <int Dim, class Sample>
Mat<Dim> fd_map_gradient(const Sample& s, const Vec<Dim>& p)
{
    constexpr double eta = 1e-5;
    const auto phi = [&](const Vec<Dim>& q) { return Vec<Dim>((1.0 + eval_height(s, q).h) * q); };
    const auto frame = tangent_frame<Dim>(p);
    Mat<Dim> F = Mat<Dim>::Zero();
    for (int k = 0; k < Dim - 1; ++k) {
        const Vec<Dim> t = frame.col(k);
        const Vec<Dim> dphi = (phi(closest_point<Dim>(p + eta * t)) - phi(closest_point<Dim>(p - eta * t))) / (2 * eta);
        F += dphi * t.transpose();
    }
    return F;
}

struct IdentityErrors {
    double metric = 0.0;    // closed-form G^{-1}, sqrt g vs FD oracle
    double b_det = 0.0;     // det B - sqrt g
    double normal = 0.0;    // nu_Gamma . tangent, | |nu_Gamma| - 1 |
    double weingarten = 0.0;
};

template <int Dim, class Sample>
void accumulate_identities(const Sample& s, const Vec<Dim>& p, IdentityErrors& e)
{
    const Mat<Dim> F = fd_map_gradient<Dim>(s, p);
    const Mat<Dim> G = F.transpose() * F + p * p.transpose();
    const auto c = surface_coefficients(p, s);
    e.metric = std::max(e.metric, (c.G_inv - G.inverse()).cwiseAbs().maxCoeff());
    e.metric = std::max(e.metric, std::abs(c.sqrt_g - std::sqrt(G.determinant())));

    const Vec<Dim> n = pulled_normal(p, s);
    const Mat<Dim> B = F + n * p.transpose();
    e.b_det = std::max(e.b_det, std::abs(B.determinant() - c.sqrt_g));

    const auto frame = tangent_frame<Dim>(p);
    for (int k = 0; k < Dim - 1; ++k) {
        const Vec<Dim> tangent = F * frame.col(k);
        e.normal = std::max(e.normal, std::abs(n.dot(tangent)) / tangent.norm());
    }
    e.normal = std::max(e.normal, std::abs(n.norm() - 1.0));

    const Mat<Dim> H = weingarten_pullback(p, s);
    e.weingarten = std::max(e.weingarten, (H - H.transpose()).cwiseAbs().maxCoeff());
    e.weingarten = std::max(e.weingarten, (H * n).cwiseAbs().maxCoeff());
}

// Spherical triangle area (Van Oosterom-Strackee) of unit vectors.
double spherical_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    const double num = std::abs(a.dot(b.cross(c)));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

// Mean of delta_h over a facet, and the oracle: subdivide the facet, project
// the corners of every sub-triangle and sum the curved patch areas.
double max_area_ratio_error(int level, int subdivisions)
{
    const SurfaceMesh mesh = build_icosphere(level);
    const auto rule = triangle_rule_degree4();
    double worst = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Vec3 x0 = mesh.vertices[mesh.triangles[t][0]];
        const Vec3 e1 = mesh.vertices[mesh.triangles[t][1]] - x0;
        const Vec3 e2 = mesh.vertices[mesh.triangles[t][2]] - x0;
        const double flat_area = 0.5 * e1.cross(e2).norm();
        const int n = subdivisions;
        double integral = 0.0;
        double oracle = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; i + j < n; ++j) {
                const auto node = [&](double a, double b) { return Vec3(x0 + (a / n) * e1 + (b / n) * e2); };
                const std::array<std::array<Vec3, 3>, 2> subs{{{node(i, j), node(i + 1, j), node(i, j + 1)},
                                                               {node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)}}};
                const int count = (i + j + 1 < n) ? 2 : 1;
                for (int k = 0; k < count; ++k) {
                    const auto& v = subs[k];
                    const double sub_area = 0.5 * (v[1] - v[0]).cross(v[2] - v[0]).norm();
                    for (std::size_t q = 0; q < rule.points.size(); ++q) {
                        const auto& l = rule.points[q];
                        const Vec3 x = l[0] * v[0] + l[1] * v[1] + l[2] * v[2];
                        integral += rule.weights[q] / rule.reference_measure * sub_area *
                                    lift_area_ratio<3>(x, mesh.facet_normals[t]);
                    }
                    oracle += spherical_area(v[0].normalized(), v[1].normalized(), v[2].normalized());
                }
            }
        }
        worst = std::max(worst, std::abs(integral - oracle) / flat_area);
    }
    return worst;
}

int check_geometry()
{
    std::mt19937_64 rng(2024);
    IdentityErrors sphere;
    IdentityErrors circle;
    for (int i = 0; i < 5; ++i) {
        const auto sp = draw_sample(kSeed, i, ProblemKind::Surface);
        for (const Vec3& p : random_sphere_points(50, rng)) accumulate_identities<3>(sp.surface(), p, sphere);
        const auto bd = draw_sample(kSeed, i, ProblemKind::BulkSurface);
        for (const Vec2& p : random_circle_points(50, rng)) accumulate_identities<2>(bd.boundary(), p, circle);
    }
    double area = 0.0;
    for (int level = 0; level <= 2; ++level) area = std::max(area, max_area_ratio_error(level, 16));

    const double metric = std::max(sphere.metric, circle.metric);
    const double bdet = std::max(sphere.b_det, circle.b_det);
    const double normal = std::max(sphere.normal, circle.normal);
    const double wein = std::max(sphere.weingarten, circle.weingarten);
    const bool pass = metric <= 1e-6 && bdet <= 1e-6 && normal <= 1e-7 && wein <= 1e-8 && area <= 1e-6;
    return report("5", "geometry identities", pass,
                  "a metric " + fmt(metric) + " <= 1e-6, b det " + fmt(bdet) + " <= 1e-6, c normal " + fmt(normal) +
                      " <= 1e-7, d weingarten " + fmt(wein) + " <= 1e-8, e area ratio " + fmt(area) + " <= 1e-6");
}

// ------------------------------------------------------------ criterion 6

int check_constants()
{
    constexpr double tol = 1e-12;  // CG tolerance, well below the 1e-9 target
    double surface_err = 0.0;
    const SurfaceMesh sphere = build_icosphere(3);
    const auto one3 = [](const Vec3&) { return 1.0; };
    std::vector<SurfaceHeightSample> heights{SurfaceHeightSample{}};
    for (int i = 0; i < 5; ++i) heights.push_back(draw_sample(kSeed, i, ProblemKind::Surface).surface());
    for (const auto& s : heights) {
        const FemSolution u = solve_cg(assemble_surface(sphere, s, one3), tol);
        surface_err = std::max(surface_err, (u.values.array() - 1.0).abs().maxCoeff());
    }

    double coupled_err = 0.0;
    const BulkMesh disk = build_disk_mesh(3);
    for (const auto& [alpha, beta] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 0.5}}) {
        const auto one2 = [](const Vec2&) { return 1.0; };
        const double ratio = alpha / beta;
        const auto ratio2 = [ratio](const Vec2&) { return ratio; };
        for (int i = 0; i < 5; ++i) {
            const auto s = draw_sample(kSeed, i, ProblemKind::BulkSurface, kCoupledParams).boundary();
            const SparseSystem sys = assemble_coupled(disk, s, one2, ratio2, alpha, beta);
            const FemSolution u = solve_cg(sys, tol);
            coupled_err = std::max(coupled_err, (u.values.head(sys.bulk_dofs).array() - 1.0).abs().maxCoeff());
            coupled_err =
                std::max(coupled_err, (u.values.tail(sys.surface_dofs).array() - ratio).abs().maxCoeff());
        }
    }
    const bool pass = surface_err <= 1e-9 && coupled_err <= 1e-9;
    return report("6", "exact constants", pass,
                  "surface max |U - 1| " + fmt(surface_err) + ", coupled max error " + fmt(coupled_err) +
                      ", target 1e-9");
}

// ------------------------------------------------------------ criterion 7

int check_coefficient_bounds()
{
    std::mt19937_64 rng(7);
    const auto points = random_sphere_points(1000, rng);
    double lo = 1e300;
    double hi = -1e300;
    long violations = 0;
    int bad_samples = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto s = draw_sample(kSeed, i, ProblemKind::Surface).surface();
        bool bad = false;
        for (const Vec3& p : points) {
            const auto c = surface_coefficients(p, s);
            const Eigen::Vector3d sv = Eigen::JacobiSVD<Mat3>(c.D).singularValues();
            const double smin = std::min(sv.minCoeff(), c.sqrt_g);
            const double smax = std::max(sv.maxCoeff(), c.sqrt_g);
            lo = std::min(lo, smin);
            hi = std::max(hi, smax);
            if (smin < 0.5 || smax > 2.0) {
                ++violations;
                bad = true;
            }
        }
        bad_samples += bad;
    }
    return report("7", "coefficient bounds in [0.5, 2.0]", violations == 0,
                  "observed range [" + fmt(lo) + ", " + fmt(hi) + "], " + std::to_string(violations) +
                      " violating points in " + std::to_string(bad_samples) + " of 1000 samples");
}

// ------------------------------------------------------------ criterion 8

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string run_to_csv(RunConfig c, const fs::path& dir)
{
    c.out_dir = dir;
    c.quiet = true;
    std::ostringstream out;
    std::ostringstream err;
    if (run(c, out, err) != 0) throw std::runtime_error("run failed: " + err.str());
    return slurp(table_path(c, c.seed));
}

int check_determinism(const fs::path& dir)
{
    fs::remove_all(dir);
    RunConfig surface;
    surface.problem = ProblemKind::Surface;
    surface.norm = NormKind::Both;
    surface.level_first = 1;
    surface.level_last = 3;
    surface.m_schedule = {4, 8, 16};
    surface.seed = 7;

    RunConfig coupled;
    coupled.problem = ProblemKind::BulkSurface;
    coupled.norm = NormKind::Both;
    coupled.level_first = 1;
    coupled.level_last = 2;
    coupled.m_schedule = {4, 8};
    coupled.seed = 7;
    coupled.eps_tol = kCoupledParams.eps_tol;
    coupled.delta = kCoupledParams.delta;
    coupled.reference_samples = 10000;

    bool pass = true;
    std::string detail;
    int k = 0;
    for (RunConfig c : {surface, coupled}) {
        const std::string name = to_string(c.problem);
        c.threads = 2;
        const std::string a = run_to_csv(c, dir / ("run" + std::to_string(k++)));
        const std::string b = run_to_csv(c, dir / ("run" + std::to_string(k++)));
        c.threads = 8;
        const std::string d = run_to_csv(c, dir / ("run" + std::to_string(k++)));
        const bool same = a == b && !a.empty();
        const bool threads = a == d;
        pass = pass && same && threads;
        detail += (detail.empty() ? "" : "; ") + name + ": repeat " + (same ? "identical" : "differs") +
                  ", 2 vs 8 threads " + (threads ? "identical" : "differs");
    }
    return report("8", "determinism", pass, detail);
}

int check(const std::string& id, const fs::path& dir)
{
    if (id == "1")
        return check_order("1", "surface L2 convergence", dir / "surface_l2.csv", {"l2"}, kL2Order, true);
    if (id == "1-magnitude") return check_magnitude(dir);
    if (id == "2")
        return check_order("2", "surface H1 convergence", dir / "surface_h1.csv", {"h1"}, kH1Order, true);
    if (id == "3")
        return check_order("3", "coupled L2 convergence", dir / "coupled_l2.csv", {"bulk_l2", "surface_l2"},
                           kL2Order, false);
    if (id == "4")
        return check_order("4", "coupled H1 convergence", dir / "coupled_h1.csv", {"bulk_h1", "surface_h1"},
                           kH1Order, false);
    if (id == "5") return check_geometry();
    if (id == "6") return check_constants();
    if (id == "7") return check_coefficient_bounds();
    if (id == "8") return check_determinism(dir);
    throw std::invalid_argument("unknown criterion " + id);
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv + 1, argv + argc);
    try {
        if (args.size() == 2 && args[0] == "run-surface") return run_surface(args[1]);
        if (args.size() == 2 && args[0] == "run-coupled") return run_coupled(args[1]);
        if ((args.size() == 2 || args.size() == 3) && args[0] == "check") {
            return check(args[1], args.size() == 3 ? fs::path(args[2]) : fs::temp_directory_path() / "stochfem_acc");
        }
    } catch (const std::exception& e) {
        std::cout << "CRITERION " << (args.size() > 1 ? args[1] : "?") << ": FAIL (" << e.what() << ")" << std::endl;
        return 1;
    }
    std::cerr << "usage: acceptance run-surface|run-coupled <dir> | check <criterion> [<dir>]\n";
    return 2;
}
