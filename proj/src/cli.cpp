#include "stochfem/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "stochfem/io.hpp"

namespace stochfem {

namespace {

std::pair<int, int> parse_levels(const std::string& text)
{
    const auto dots = text.find("..");
    try {
        std::size_t used = 0;
        if (dots == std::string::npos) {
            const int l = std::stoi(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return {l, l};
        }
        const std::string a = text.substr(0, dots), b = text.substr(dots + 2);
        const int first = std::stoi(a, &used);
        if (used != a.size()) throw std::invalid_argument(text);
        const int last = std::stoi(b, &used);
        if (used != b.size()) throw std::invalid_argument(text);
        return {first, last};
    } catch (const std::exception&) {
        throw UsageError("--levels: expected a..b or a single level, got '" + text + "'");
    }
}

std::vector<std::size_t> parse_m_schedule(const std::vector<std::string>& items)
{
    if (items.size() == 1 && items.front() == "auto") return {};
    std::string text;
    for (const auto& item : items) text += (text.empty() ? "" : ",") + item;
    std::vector<std::size_t> out;
    for (const std::string& item : items) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || v < 1) {
            throw UsageError("--m-schedule: expected 'auto' or a comma list of positive integers, got '" + text + "'");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw UsageError("--m-schedule: empty list");
    return out;
}

int parse_threads(const std::string& text, const char* source)
{
    if (text == "auto") return std::max(1u, std::thread::hardware_concurrency());
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || v < 1) {
        throw UsageError(std::string(source) + ": expected 'auto' or a positive integer, got '" + text + "'");
    }
    return v;
}

struct RawOptions {
    std::string problem;
    std::string levels = "3..6";
    std::string norm = "l2";
    std::vector<std::string> m_schedule{"auto"};
    std::string threads;
    std::string out_dir = "results";
};

void build_app(CLI::App& app, RunConfig& c, RawOptions& raw)
{
    app.description("Monte-Carlo finite element convergence study for PDEs on random surfaces and domains.");
    app.add_option("--problem", raw.problem, "surface | bulk-surface")
        ->check(CLI::IsMember({"surface", "bulk-surface"}));
    app.add_option("--levels", raw.levels, "mesh levels a..b (default 3..6)");
    app.add_option("--norm", raw.norm, "l2 | h1 | both (default l2)")->check(CLI::IsMember({"l2", "h1", "both"}));
    app.add_option("--m-schedule", raw.m_schedule, "auto or comma list of sample counts, one per level")
        ->delimiter(',');
    app.add_option("--seed", c.seed, "master seed (default 42)");
    app.add_option("--alpha", c.alpha, "Robin coupling alpha > 0 (default 1)");
    app.add_option("--beta", c.beta, "Robin coupling beta > 0 (default 1)");
    app.add_option("--eps-tol", c.eps_tol, "height amplitude (default 0.1, at most 0.3)");
    app.add_option("--sigma-tol", c.sigma_tol, "solution randomness amplitude (default 0.1, at most 0.3)");
    app.add_option("--delta", c.delta, "boundary blending width in (0, 0.9) (default 0.4)");
    app.add_option("--out-dir", raw.out_dir, "output directory (default results)");
    app.add_option("--export-samples", c.export_samples, "write VTK files for this many samples (default 0)");
    app.add_option("--repeat", c.repeat, "number of repetitions with seeds seed, seed+1, ... (default 1)");
    app.add_option("--threads", raw.threads, "worker threads or auto (default: $STOCHFEM_THREADS, else 1)");
    app.add_option("--reference-samples", c.reference_samples,
                   "samples for the reference E[v] of the coupled problem (default 100000)");
    app.add_option("--cg-tol", c.cg_tol, "relative CG tolerance (default 1e-10)");
    app.add_flag("--quiet", c.quiet, "no progress messages");
    app.set_config("--config", "", "flat key = value file; flags override its values");
    app.allow_config_extras(false);
}

void validate(const RunConfig& c)
{
    auto fail = [](const std::string& m) { throw UsageError(m); };
    if (!(c.eps_tol >= 0.0 && c.eps_tol <= kMaxAmplitude)) fail("--eps-tol must lie in [0, 0.3]");
    if (!(c.sigma_tol >= 0.0 && c.sigma_tol <= kMaxAmplitude)) fail("--sigma-tol must lie in [0, 0.3]");
    if (!(c.delta > 0.0 && c.delta < 0.9)) fail("--delta must lie in (0, 0.9)");
    if (!(c.alpha > 0.0) || !(c.beta > 0.0)) fail("--alpha and --beta must be > 0");
    const int max_level = c.problem == ProblemKind::Surface ? 8 : 9;
    if (c.level_first < 0 || c.level_last > max_level || c.level_first > c.level_last) {
        fail("--levels must satisfy 0 <= a <= b <= " + std::to_string(max_level));
    }
    const auto n_levels = static_cast<std::size_t>(c.level_last - c.level_first + 1);
    if (!c.m_schedule.empty() && c.m_schedule.size() != n_levels) {
        fail("--m-schedule needs one entry per level (" + std::to_string(n_levels) + ")");
    }
    if (c.export_samples < 0) fail("--export-samples must be >= 0");
    if (c.repeat < 1) fail("--repeat must be >= 1");
    if (c.reference_samples < 10000) fail("--reference-samples must be >= 10000");
    if (!(c.cg_tol >= 1e-14 && c.cg_tol <= 1e-2)) fail("--cg-tol must lie in [1e-14, 1e-2]");
}

} // namespace

std::string usage()
{
    CLI::App app{"", "stochfem"};
    RunConfig c;
    RawOptions raw;
    build_app(app, c, raw);
    return app.help();
}

RunConfig parse_config(const std::vector<std::string>& args, const EnvLookup& env)
{
    if (args.empty()) throw UsageError("no arguments given\n" + usage());
    CLI::App app{"", "stochfem"};
    RunConfig c;
    RawOptions raw;
    build_app(app, c, raw);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(usage());
    } catch (const CLI::ParseError& e) {
        throw UsageError(std::string(e.what()) + "\n" + usage());
    }
    if (raw.problem.empty()) throw UsageError("--problem is required\n" + usage());
    c.problem = raw.problem == "surface" ? ProblemKind::Surface : ProblemKind::BulkSurface;
    c.norm = raw.norm == "l2" ? NormKind::L2 : raw.norm == "h1" ? NormKind::H1 : NormKind::Both;
    std::tie(c.level_first, c.level_last) = parse_levels(raw.levels);
    c.m_schedule = parse_m_schedule(raw.m_schedule);
    c.out_dir = raw.out_dir;
    if (!raw.threads.empty()) {
        c.threads = parse_threads(raw.threads, "--threads");
    } else {
        const EnvLookup lookup = env ? env : EnvLookup([](const char* k) { return std::getenv(k); });
        if (const char* v = lookup("STOCHFEM_THREADS"); v && *v) c.threads = parse_threads(v, "STOCHFEM_THREADS");
    }
    validate(c);
    return c;
}

std::vector<Schedule> schedules_for(const RunConfig& c)
{
    std::vector<Schedule> out;
    for (int rep = 0; rep < c.repeat; ++rep) {
        const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(rep);
        Schedule s;
        if (c.m_schedule.empty()) {
            s = balanced_schedule(c.problem, c.norm, c.level_first, c.level_last, seed);
        } else {
            s.problem = c.problem;
            s.norm = c.norm;
            s.master_seed = seed;
            for (int l = c.level_first; l <= c.level_last; ++l) {
                s.rows.push_back({l, c.m_schedule[static_cast<std::size_t>(l - c.level_first)]});
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

ExperimentOptions experiment_options(const RunConfig& c)
{
    ExperimentOptions o;
    o.params = {c.eps_tol, c.sigma_tol, c.delta};
    o.alpha = c.alpha;
    o.beta = c.beta;
    o.cg_tol = c.cg_tol;
    o.threads = c.threads;
    o.reference_samples = c.reference_samples;
    o.cache_dir = c.out_dir / "cache";
    return o;
}

std::filesystem::path table_path(const RunConfig& c, std::uint64_t seed)
{
    return c.out_dir / (std::string(to_string(c.problem)) + "_" + to_string(c.norm) + "_seed" +
                        std::to_string(seed) + ".csv");
}

std::vector<std::filesystem::path> export_realisations(const RunConfig& c, int n)
{
    if (n < 1) throw std::invalid_argument("export_realisations: n must be >= 1");
    const ExperimentOptions opt = experiment_options(c);
    const std::filesystem::path dir = c.out_dir / "vtk";
    std::vector<std::filesystem::path> files;
    auto numbered = [](const char* stem, int i) {
        std::ostringstream s;
        s << stem << "_sample_" << std::setw(4) << std::setfill('0') << i << ".vtk";
        return s.str();
    };
    if (c.problem == ProblemKind::Surface) {
        const SurfaceMesh mesh = build_icosphere(c.level_last);
        const SurfaceAssembler assembler(mesh);
        for (int i = 0; i < n; ++i) {
            const GeometrySample sample = draw_sample(c.seed, static_cast<std::uint64_t>(i), c.problem, opt.params);
            const Eigen::VectorXd u = solve_surface_sample(assembler, c.seed, static_cast<std::uint64_t>(i), opt);
            std::vector<Vec3> pts;
            pts.reserve(mesh.vertices.size());
            for (const Vec3& v : mesh.vertices) pts.push_back((1.0 + eval_height(sample.surface(), v).h) * v);
            files.push_back(dir / numbered("surface", i));
            write_vtk_surface(files.back(), pts, mesh.triangles, u, "u",
                              "surface sample " + std::to_string(i) + " seed " + std::to_string(c.seed));
        }
        return files;
    }
    const BulkMesh mesh = build_disk_mesh(c.level_last);
    const CoupledAssembler assembler(mesh, c.alpha, c.beta);
    const auto nb = static_cast<Eigen::Index>(mesh.vertices.size());
    for (int i = 0; i < n; ++i) {
        const GeometrySample sample = draw_sample(c.seed, static_cast<std::uint64_t>(i), c.problem, opt.params);
        const Eigen::VectorXd uv = solve_coupled_sample(assembler, c.seed, static_cast<std::uint64_t>(i), opt);
        std::vector<Vec2> pts;
        pts.reserve(mesh.vertices.size());
        for (const Vec2& v : mesh.vertices) pts.push_back(bulk_map(sample.boundary(), v).phi);
        std::vector<Vec2> curve;
        for (int v : mesh.boundary_loop) curve.push_back(pts[v]);
        const std::string title = "bulk-surface sample " + std::to_string(i) + " seed " + std::to_string(c.seed);
        files.push_back(dir / numbered("bulk", i));
        write_vtk_bulk(files.back(), pts, mesh.triangles, uv.head(nb), "u", title);
        files.push_back(dir / numbered("boundary", i));
        write_vtk_curve(files.back(), curve, uv.tail(uv.size() - nb), "v", title);
    }
    return files;
}

namespace {

void print_band(const std::vector<ConvergenceTable>& tables, std::ostream& out)
{
    const ConvergenceTable& first = tables.front();
    out << "mean +- sample std over " << tables.size() << " repetitions\n";
    for (std::size_t i = 0; i < first.rows.size(); ++i) {
        out << std::setw(10) << std::fixed << std::setprecision(5) << first.rows[i].h << std::setw(7)
            << first.rows[i].samples;
        for (std::size_t k = 0; k < first.groups.size(); ++k) {
            double s = 0.0, s2 = 0.0;
            for (const auto& t : tables) {
                s += t.rows[i].errors[k];
                s2 += t.rows[i].errors[k] * t.rows[i].errors[k];
            }
            const double n = static_cast<double>(tables.size());
            const double mean = s / n;
            const double var = n > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1)) : 0.0;
            out << "  " << first.groups[k] << " " << std::scientific << std::setprecision(4) << mean << " +- "
                << std::sqrt(var) << std::fixed;
        }
        out << '\n';
    }
}

} // namespace

int run(const RunConfig& c, std::ostream& out, std::ostream& err)
{
    ExperimentOptions opt = experiment_options(c);
    if (!c.quiet) opt.progress = [&err](const std::string& m) { err << m << std::endl; };
    std::vector<ConvergenceTable> tables;
    for (const Schedule& s : schedules_for(c)) {
        ConvergenceTable t = run_convergence(s, opt);
        const auto path = table_path(c, s.master_seed);
        write_table_csv(t, path);
        out << table_console(t) << "written " << path.string() << "\n\n";
        tables.push_back(std::move(t));
    }
    if (tables.size() > 1) print_band(tables, out);
    if (c.export_samples > 0) {
        for (const auto& f : export_realisations(c, c.export_samples)) out << "written " << f.string() << '\n';
    }
    return 0;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    for (const std::string& a : args) {
        if (a == "-h" || a == "--help") {
            out << usage();
            return 0;
        }
    }
    try {
        return run(parse_config(args), out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace stochfem
