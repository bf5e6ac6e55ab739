#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "stochfem/cli.hpp"
#include "stochfem/experiments.hpp"
#include "stochfem/fem.hpp"
#include "stochfem/io.hpp"
#include "stochfem/mesh.hpp"
#include "stochfem/pullback.hpp"
#include "stochfem/random_field.hpp"

namespace py = pybind11;
using namespace stochfem;

namespace {

template <int Dim>
Eigen::MatrixXd points_matrix(const std::vector<Vec<Dim>>& pts)
{
    Eigen::MatrixXd out(pts.size(), Dim);
    for (std::size_t i = 0; i < pts.size(); ++i) out.row(i) = pts[i].transpose();
    return out;
}

Eigen::MatrixXi triangles_matrix(const std::vector<Triangle>& tris)
{
    Eigen::MatrixXi out(tris.size(), 3);
    for (std::size_t i = 0; i < tris.size(); ++i)
        for (int j = 0; j < 3; ++j) out(i, j) = tris[i][j];
    return out;
}

ExperimentOptions make_options(const SampleParams& params, double alpha, double beta, int threads,
                               std::size_t reference_samples)
{
    ExperimentOptions o;
    o.params = params;
    o.alpha = alpha;
    o.beta = beta;
    o.threads = threads;
    o.reference_samples = reference_samples;
    return o;
}

} // namespace

PYBIND11_MODULE(_stochfem, m)
{
    m.doc() = "Monte-Carlo finite elements on randomly perturbed spheres and disks.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DegeneratePoint>(m, "DegeneratePoint", base.ptr());
    py::register_exception<OutOfBand>(m, "OutOfBand", base.ptr());
    py::register_exception<SingularGeometry>(m, "SingularGeometry", base.ptr());
    py::register_exception<OutsideTriangle>(m, "OutsideTriangle", base.ptr());
    py::register_exception<NoConvergence>(m, "NoConvergence", base.ptr());
    py::register_exception<CoefficientBoundViolation>(m, "CoefficientBoundViolation", base.ptr());
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::enum_<ProblemKind>(m, "ProblemKind")
        .value("Surface", ProblemKind::Surface)
        .value("BulkSurface", ProblemKind::BulkSurface);
    py::enum_<NormKind>(m, "NormKind")
        .value("L2", NormKind::L2)
        .value("H1", NormKind::H1)
        .value("Both", NormKind::Both);

    py::class_<SampleParams>(m, "SampleParams")
        .def(py::init([](double eps_tol, double sigma_tol, double delta) {
                 return SampleParams{eps_tol, sigma_tol, delta};
             }),
             py::arg("eps_tol") = 0.1, py::arg("sigma_tol") = 0.1, py::arg("delta") = 0.4)
        .def_readwrite("eps_tol", &SampleParams::eps_tol)
        .def_readwrite("sigma_tol", &SampleParams::sigma_tol)
        .def_readwrite("delta", &SampleParams::delta);

    // Geometry samples.
    py::class_<SolutionRandoms>(m, "SolutionRandoms")
        .def_readonly("nu1", &SolutionRandoms::nu1)
        .def_readonly("nu2", &SolutionRandoms::nu2)
        .def_readonly("lam", &SolutionRandoms::lambda);
    py::class_<SurfaceHeightSample>(m, "SurfaceHeightSample")
        .def_property_readonly("coeffs", &SurfaceHeightSample::coeffs)
        .def_property_readonly("eps_tol", &SurfaceHeightSample::eps_tol);
    py::class_<BoundaryHeightSample>(m, "BoundaryHeightSample")
        .def_readonly("cos_coeffs", &BoundaryHeightSample::cos_coeffs)
        .def_readonly("sin_coeffs", &BoundaryHeightSample::sin_coeffs)
        .def_readonly("delta", &BoundaryHeightSample::delta)
        .def_readonly("eps_tol", &BoundaryHeightSample::eps_tol);
    py::class_<GeometrySample>(m, "GeometrySample")
        .def_readonly("randoms", &GeometrySample::randoms)
        .def_readonly("sample_index", &GeometrySample::sample_index)
        .def_readonly("master_seed", &GeometrySample::master_seed)
        .def_property_readonly("surface", &GeometrySample::surface, py::return_value_policy::reference_internal)
        .def_property_readonly("boundary", &GeometrySample::boundary, py::return_value_policy::reference_internal);

    m.def("draw_sample", &draw_sample, py::arg("master_seed"), py::arg("index"), py::arg("problem"),
          py::arg("params") = SampleParams{});
    m.def("counter_uniform", &counter_uniform, py::arg("seed"), py::arg("index"), py::arg("slot"));

    m.def(
        "eval_height",
        [](const SurfaceHeightSample& s, const Vec3& p) {
            const auto v = eval_height(s, p);
            return py::make_tuple(v.h, v.grad);
        },
        py::arg("sample"), py::arg("p"), "Height and tangential gradient at a point of S^2.");
    m.def(
        "eval_height",
        [](const BoundaryHeightSample& s, const Vec2& p) {
            const auto v = eval_height(s, p);
            return py::make_tuple(v.h, v.grad);
        },
        py::arg("sample"), py::arg("p"));
    m.def(
        "bulk_map",
        [](const BoundaryHeightSample& s, const Vec2& x) {
            const auto v = bulk_map(s, x);
            return py::make_tuple(v.phi, v.jacobian);
        },
        py::arg("sample"), py::arg("x"), "phi(x) and its Jacobian.");

    // Pulled-back coefficients.
    m.def(
        "surface_coefficients",
        [](const SurfaceHeightSample& s, const Vec3& p) {
            const auto c = surface_coefficients(p, s);
            return py::dict(py::arg("D") = c.D, py::arg("G_inv") = c.G_inv, py::arg("A") = c.A,
                            py::arg("sqrt_g") = c.sqrt_g);
        },
        py::arg("sample"), py::arg("p"));
    m.def(
        "surface_coefficients",
        [](const BoundaryHeightSample& s, const Vec2& p) {
            const auto c = surface_coefficients(p, s);
            return py::dict(py::arg("D") = c.D, py::arg("G_inv") = c.G_inv, py::arg("A") = c.A,
                            py::arg("sqrt_g") = c.sqrt_g);
        },
        py::arg("sample"), py::arg("p"));
    m.def(
        "bulk_coefficients",
        [](const BoundaryHeightSample& s, const Vec2& x) {
            const auto c = bulk_coefficients(x, s);
            return py::dict(py::arg("D") = c.D_bulk, py::arg("G_inv") = c.G_inv, py::arg("sqrt_g") = c.sqrt_g);
        },
        py::arg("sample"), py::arg("x"));
    m.def("pulled_normal", py::overload_cast<const Vec3&, const SurfaceHeightSample&>(&pulled_normal), py::arg("p"),
          py::arg("sample"));
    m.def("pulled_normal", py::overload_cast<const Vec2&, const BoundaryHeightSample&>(&pulled_normal), py::arg("p"),
          py::arg("sample"));

    // Meshes.
    py::class_<SurfaceMesh>(m, "SurfaceMesh")
        .def_property_readonly("vertices", [](const SurfaceMesh& s) { return points_matrix<3>(s.vertices); })
        .def_property_readonly("triangles", [](const SurfaceMesh& s) { return triangles_matrix(s.triangles); })
        .def_readonly("h_max", &SurfaceMesh::h_max)
        .def("total_area", [](const SurfaceMesh& s) { return total_area(s); });
    py::class_<BulkMesh>(m, "BulkMesh")
        .def_property_readonly("vertices", [](const BulkMesh& s) { return points_matrix<2>(s.vertices); })
        .def_property_readonly("triangles", [](const BulkMesh& s) { return triangles_matrix(s.triangles); })
        .def_readonly("boundary_loop", &BulkMesh::boundary_loop)
        .def_readonly("h_max", &BulkMesh::h_max)
        .def("total_area", [](const BulkMesh& s) { return total_area(s); });
    m.def("build_icosphere", &build_icosphere, py::arg("level"));
    m.def("build_disk_mesh", &build_disk_mesh, py::arg("level"));

    // Path-wise solves and Monte-Carlo estimates.
    m.def(
        "solve_sample",
        [](ProblemKind problem, int level, std::uint64_t seed, std::uint64_t index, const SampleParams& params,
           double alpha, double beta) {
            const ExperimentOptions o = make_options(params, alpha, beta, 1, kDefaultReferenceSamples);
            py::gil_scoped_release release;
            if (problem == ProblemKind::Surface) {
                const SurfaceMesh mesh = build_icosphere(level);
                return solve_surface_sample(SurfaceAssembler(mesh), seed, index, o);
            }
            const BulkMesh mesh = build_disk_mesh(level);
            return solve_coupled_sample(CoupledAssembler(mesh, alpha, beta), seed, index, o);
        },
        py::arg("problem"), py::arg("level"), py::arg("seed"), py::arg("index"), py::arg("params") = SampleParams{},
        py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
        "Nodal solution for one sample. Coupled problems return bulk DOFs followed by the boundary loop.");
    m.def(
        "monte_carlo_mean",
        [](ProblemKind problem, int level, std::uint64_t seed, std::uint64_t first, std::size_t count,
           const SampleParams& params, double alpha, double beta, int threads) {
            const ExperimentOptions o = make_options(params, alpha, beta, threads, kDefaultReferenceSamples);
            py::gil_scoped_release release;
            return monte_carlo_mean(problem, level, seed, first, count, o);
        },
        py::arg("problem"), py::arg("level"), py::arg("seed"), py::arg("first"), py::arg("count"),
        py::arg("params") = SampleParams{}, py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("threads") = 1);

    py::class_<ConvergenceTable>(m, "ConvergenceTable")
        .def_readonly("groups", &ConvergenceTable::groups)
        .def_readonly("seed", &ConvergenceTable::seed)
        .def_property_readonly("h", [](const ConvergenceTable& t) {
            std::vector<double> out;
            for (const auto& r : t.rows) out.push_back(r.h);
            return out;
        })
        .def_property_readonly("samples", [](const ConvergenceTable& t) {
            std::vector<std::size_t> out;
            for (const auto& r : t.rows) out.push_back(r.samples);
            return out;
        })
        .def_property_readonly("errors", [](const ConvergenceTable& t) {
            std::vector<std::vector<double>> out;
            for (const auto& r : t.rows) out.push_back(r.errors);
            return out;
        })
        .def_property_readonly("eoc_h", [](const ConvergenceTable& t) {
            std::vector<std::vector<std::optional<double>>> out;
            for (const auto& r : t.rows) out.push_back(r.eoc_h);
            return out;
        })
        .def("to_csv", [](const ConvergenceTable& t) { return table_csv(t); })
        .def("__str__", [](const ConvergenceTable& t) { return table_console(t); });

    m.def(
        "run_convergence",
        [](ProblemKind problem, NormKind norm, int first_level, int last_level, std::uint64_t seed,
           std::vector<std::size_t> m_schedule, const SampleParams& params, double alpha, double beta, int threads,
           std::size_t reference_samples) {
            Schedule s = balanced_schedule(problem, norm, first_level, last_level, seed);
            if (!m_schedule.empty()) {
                if (m_schedule.size() != s.rows.size()) {
                    throw std::invalid_argument("run_convergence: m_schedule needs one entry per level");
                }
                for (std::size_t i = 0; i < s.rows.size(); ++i) s.rows[i].samples = m_schedule[i];
            }
            const ExperimentOptions o = make_options(params, alpha, beta, threads, reference_samples);
            py::gil_scoped_release release;
            return run_convergence(s, o);
        },
        py::arg("problem"), py::arg("norm"), py::arg("first_level"), py::arg("last_level"), py::arg("seed") = 42,
        py::arg("m_schedule") = std::vector<std::size_t>{}, py::arg("params") = SampleParams{},
        py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("threads") = 1,
        py::arg("reference_samples") = kDefaultReferenceSamples);

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = main_entry(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line tool in-process. Returns (exit code, stdout, stderr).");
}
