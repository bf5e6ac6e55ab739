#include "stochfem/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"

namespace stochfem {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 on_circle(double theta) { return Vec2(std::cos(theta), std::sin(theta)); }
Vec2 circle_tangent(double theta) { return Vec2(-std::sin(theta), std::cos(theta)); }

} // namespace

// ------------------------------------------------------------ surface problem

SolutionValue<3> expected_surface_solution(const Vec3& p)
{
    const double x = p[0], y = p[1], z = p[2];
    const double a = kPi * (x * x - 1.0) * y * (z - 1.0);
    const Vec3 da(2.0 * kPi * x * y * (z - 1.0), kPi * (x * x - 1.0) * (z - 1.0), kPi * (x * x - 1.0) * y);
    SolutionValue<3> out;
    out.value = std::sin(a);
    out.grad = std::cos(a) * da;
    return out;
}

SolutionValue<3> exact_surface_solution(const SolutionRandoms& r, const Vec3& p)
{
    SolutionValue<3> out = expected_surface_solution(p);
    const double x = p[0], y = p[1], z = p[2];
    const double c1 = r.sigma_tol * r.nu1, c2 = r.sigma_tol * r.nu2;

    const double b = kPi * z * (y + 1.0);
    const Vec3 db(0.0, kPi * z, kPi * (y + 1.0));
    out.value += c1 * std::cos(b);
    out.grad -= c1 * std::sin(b) * db;

    const double c = kPi * (x + y) * z * z;
    const Vec3 dc(kPi * z * z, kPi * z * z, 2.0 * kPi * (x + y) * z);
    out.value += c2 * std::sin(c);
    out.grad += c2 * std::cos(c) * dc;
    return out;
}

double surface_load(const SurfaceHeightSample& s, const SolutionField<3>& u, const Vec3& p)
{
    auto flux = [&](const Vec3& x) -> Vec3 {
        const SurfaceCoefficients<3> c = surface_coefficients_from_height<3>(x, eval_height(s, x));
        return c.D * (tangent_projection<3>(x) * u(x).grad);
    };
    const auto frame = tangent_frame<3>(p);
    double div = 0.0;
    for (int k = 0; k < 2; ++k) {
        const Vec3 t = frame.col(k);
        const Vec3 fp = flux(closest_point<3>(p + kLoadFdStep * t));
        const Vec3 fm = flux(closest_point<3>(p - kLoadFdStep * t));
        div += t.dot(fp - fm) / (2.0 * kLoadFdStep);
    }
    const double sqrt_g = surface_coefficients_from_height<3>(p, eval_height(s, p)).sqrt_g;
    return -div / sqrt_g + u(p).value;
}

double manufactured_surface_load(const GeometrySample& sample, const Vec3& p)
{
    const SolutionRandoms& r = sample.randoms;
    return surface_load(sample.surface(), [&r](const Vec3& x) { return exact_surface_solution(r, x); }, p);
}

// ------------------------------------------------------- bulk-surface problem

SolutionValue<2> expected_bulk_solution(const Vec2& p)
{
    const double x = p[0], y = p[1];
    const double sxy = std::sin(kPi * x * y), cxy = std::cos(kPi * x * y);
    const double syy = std::sin(kPi * y * y), cyy = std::cos(kPi * y * y);
    SolutionValue<2> out;
    out.value = sxy * cyy;
    out.grad = Vec2(kPi * y * cxy * cyy, kPi * x * cxy * cyy - 2.0 * kPi * y * sxy * syy);
    return out;
}

SolutionValue<2> exact_bulk_solution(const SolutionRandoms& r, const Vec2& p)
{
    SolutionValue<2> out = expected_bulk_solution(p);
    const double x = p[0], y = p[1];
    const double c = r.eps_tol * r.lambda;
    const double sxy = std::sin(kPi * x * y);
    out.value += c * std::cos(kPi * x * y);
    out.grad -= c * kPi * sxy * Vec2(y, x);
    return out;
}

double robin_trace(const BoundaryHeightSample& s, const SolutionField<2>& u, const Vec2& p, double alpha,
                   double beta)
{
    const ConormalFactor cf = conormal_factor(p, s);
    const SolutionValue<2> v = u(p);
    return (alpha * v.value + cf.vec.dot(v.grad)) / beta;
}

double manufactured_robin_trace(const GeometrySample& sample, const Vec2& p, double alpha, double beta)
{
    const SolutionRandoms& r = sample.randoms;
    return robin_trace(sample.boundary(), [&r](const Vec2& x) { return exact_bulk_solution(r, x); }, p, alpha,
                       beta);
}

double bulk_load(const BoundaryHeightSample& s, const SolutionField<2>& u, const Vec2& x)
{
    auto flux = [&](const Vec2& y) -> Vec2 {
        const BulkCoefficients c = bulk_coefficients_from_jacobian(bulk_map_extended(s, y).jacobian);
        return c.D_bulk * u(y).grad;
    };
    double div = 0.0;
    for (int j = 0; j < 2; ++j) {
        Vec2 xp = x, xm = x;
        xp[j] += kLoadFdStep;
        xm[j] -= kLoadFdStep;
        div += (flux(xp)[j] - flux(xm)[j]) / (2.0 * kLoadFdStep);
    }
    return -div / bulk_coefficients(x, s).sqrt_g + u(x).value;
}

double manufactured_bulk_load(const GeometrySample& sample, const Vec2& x)
{
    const SolutionRandoms& r = sample.randoms;
    return bulk_load(sample.boundary(), [&r](const Vec2& y) { return exact_bulk_solution(r, y); }, x);
}

double coupled_surface_load(const BoundaryHeightSample& s, const SolutionField<2>& u, const Vec2& p, double alpha,
                            double beta)
{
    const double theta = std::atan2(p[1], p[0]);
    const double eta = kLoadFdStep;
    auto v = [&](double th) { return robin_trace(s, u, on_circle(th), alpha, beta); };
    const double v_m2 = v(theta - 2.0 * eta), v_0 = v(theta), v_p2 = v(theta + 2.0 * eta);
    auto flux = [&](double th, double dv) -> Vec2 {
        return surface_coefficients(on_circle(th), s).D * (dv * circle_tangent(th));
    };
    const Vec2 fp = flux(theta + eta, (v_p2 - v_0) / (2.0 * eta));
    const Vec2 fm = flux(theta - eta, (v_0 - v_m2) / (2.0 * eta));
    const double div = circle_tangent(theta).dot(fp - fm) / (2.0 * eta);

    const double sqrt_g = surface_coefficients(p, s).sqrt_g;
    const Vec2 conormal = conormal_factor(p, s).vec;
    return -div / sqrt_g + robin_trace(s, u, p, alpha, beta) + conormal.dot(u(p).grad);
}

double manufactured_surface_load_coupled(const GeometrySample& sample, const Vec2& p, double alpha, double beta)
{
    const SolutionRandoms& r = sample.randoms;
    return coupled_surface_load(sample.boundary(), [&r](const Vec2& x) { return exact_bulk_solution(r, x); }, p,
                                alpha, beta);
}

// ------------------------------------------------------- reference E[v]

namespace {

constexpr std::size_t kReferenceBlock = 256;

} // namespace

ReferenceTrace reference_expected_v(const std::vector<Vec2>& points, std::uint64_t seed, std::size_t m_ref,
                                    const SampleParams& params, double alpha, double beta, int threads)
{
    if (m_ref == 0) throw std::invalid_argument("reference_expected_v: m_ref must be >= 1");
    const std::size_t n = points.size();
    const double eta = kLoadFdStep;
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) theta[i] = std::atan2(points[i][1], points[i][0]);

    // Per point: v(theta - eta), v(theta), v(theta + eta).
    const std::size_t blocks = (m_ref + kReferenceBlock - 1) / kReferenceBlock;
    std::vector<Eigen::VectorXd> block_sums(blocks);
    const std::uint64_t ref_seed = seed + kReferenceSeedOffset;
    detail::parallel_for(blocks, threads, [&](std::size_t b) {
        PairwiseSum acc;
        const std::size_t end = std::min(m_ref, (b + 1) * kReferenceBlock);
        for (std::size_t m = b * kReferenceBlock; m < end; ++m) {
            const GeometrySample sample = draw_sample(ref_seed, m, ProblemKind::BulkSurface, params);
            Eigen::VectorXd v(3 * n);
            for (std::size_t i = 0; i < n; ++i) {
                for (int k = 0; k < 3; ++k) {
                    v[3 * i + k] = manufactured_robin_trace(sample, on_circle(theta[i] + (k - 1) * eta), alpha, beta);
                }
            }
            acc.push(std::move(v));
        }
        block_sums[b] = acc.sum();
    });
    PairwiseSum total;
    for (auto& s : block_sums) total.push(std::move(s));
    const Eigen::VectorXd mean = total.sum() / static_cast<double>(m_ref);

    ReferenceTrace out;
    out.values.resize(n);
    out.grads.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = mean[3 * i + 1];
        out.grads[i] = (mean[3 * i + 2] - mean[3 * i]) / (2.0 * eta) * circle_tangent(theta[i]);
    }
    return out;
}

double reference_expected_v(const Vec2& p, std::uint64_t seed, std::size_t m_ref, const SampleParams& params,
                            double alpha, double beta)
{
    return reference_expected_v(std::vector<Vec2>{p}, seed, m_ref, params, alpha, beta).values[0];
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

ReferenceTrace cached_reference(const std::vector<Vec2>& points, int level, std::uint64_t seed,
                                const ExperimentOptions& opt)
{
    const std::size_t n = points.size();
    auto compute = [&] {
        return reference_expected_v(points, seed, opt.reference_samples, opt.params, opt.alpha, opt.beta,
                                    opt.threads);
    };
    if (opt.cache_dir.empty()) return compute();

    std::uint64_t h = 0xcbf29ce484222325ULL;
    const double scalars[5] = {opt.alpha, opt.beta, opt.params.eps_tol, opt.params.sigma_tol, opt.params.delta};
    h = fnv1a(h, scalars, sizeof(scalars));
    for (const Vec2& p : points) h = fnv1a(h, p.data(), 2 * sizeof(double));
    std::ostringstream name;
    name << "expected_v_L" << level << "_seed" << seed << "_M" << opt.reference_samples << "_" << std::hex << h
         << ".bin";
    const std::filesystem::path path = opt.cache_dir / name.str();

    ReferenceTrace out;
    if (std::ifstream in{path, std::ios::binary}) {
        std::uint64_t stored = 0;
        in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
        if (in && stored == n) {
            out.values.resize(n);
            out.grads.resize(n);
            in.read(reinterpret_cast<char*>(out.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
            for (auto& g : out.grads) in.read(reinterpret_cast<char*>(g.data()), 2 * sizeof(double));
            if (in) return out;
        }
    }
    out = compute();
    std::filesystem::create_directories(opt.cache_dir);
    std::ofstream of{path, std::ios::binary};
    if (!of) throw IoError("cannot write reference cache " + path.string());
    const std::uint64_t stored = n;
    of.write(reinterpret_cast<const char*>(&stored), sizeof(stored));
    of.write(reinterpret_cast<const char*>(out.values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    for (const auto& g : out.grads) of.write(reinterpret_cast<const char*>(g.data()), 2 * sizeof(double));
    if (!of) throw IoError("failed writing reference cache " + path.string());
    return out;
}

} // namespace

// --------------------------------------------------------------- tables

const char* to_string(ProblemKind problem)
{
    return problem == ProblemKind::Surface ? "surface" : "bulk-surface";
}

const char* to_string(NormKind norm)
{
    switch (norm) {
    case NormKind::L2: return "l2";
    case NormKind::H1: return "h1";
    case NormKind::Both: return "both";
    }
    return "?";
}

void Schedule::validate() const
{
    if (rows.empty()) throw std::invalid_argument("Schedule: no rows");
    const int max_level = problem == ProblemKind::Surface ? 8 : 9;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].samples < 1) throw std::invalid_argument("Schedule: M must be >= 1");
        if (rows[i].level < 0 || rows[i].level > max_level) throw std::invalid_argument("Schedule: level out of range");
        if (i > 0 && rows[i].level <= rows[i - 1].level) {
            throw std::invalid_argument("Schedule: levels must be strictly increasing");
        }
    }
}

Schedule balanced_schedule(ProblemKind problem, NormKind norm, int first_level, int last_level,
                        std::uint64_t master_seed)
{
    if (last_level < first_level) throw std::invalid_argument("balanced_schedule: empty level range");
    Schedule s;
    s.problem = problem;
    s.norm = norm;
    s.master_seed = master_seed;
    std::size_t m = norm == NormKind::L2 ? 1 : 64;
    const std::size_t factor = norm == NormKind::L2 ? 16 : 4;
    for (int l = first_level; l <= last_level; ++l, m *= factor) s.rows.push_back({l, m});
    return s;
}

double eoc(double error_prev, double error, double param_prev, double param)
{
    return std::log(error_prev / error) / std::log(param_prev / param);
}

void fill_eoc(ConvergenceTable& table)
{
    const std::size_t g = table.groups.size();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        TableRow& row = table.rows[i];
        row.eoc_h.assign(g, std::nullopt);
        row.eoc_M.assign(g, std::nullopt);
        if (i == 0) continue;
        const TableRow& prev = table.rows[i - 1];
        for (std::size_t k = 0; k < g; ++k) {
            if (prev.h != row.h) row.eoc_h[k] = eoc(prev.errors[k], row.errors[k], prev.h, row.h);
            if (prev.samples != row.samples) {
                row.eoc_M[k] = eoc(prev.errors[k], row.errors[k], static_cast<double>(prev.samples),
                                   static_cast<double>(row.samples));
            }
        }
    }
}

void PairwiseSum::push(Eigen::VectorXd v)
{
    std::size_t weight = 1;
    while (!stack_.empty() && stack_.back().first == weight) {
        v = stack_.back().second + v;
        weight *= 2;
        stack_.pop_back();
    }
    stack_.emplace_back(weight, std::move(v));
    ++count_;
}

Eigen::VectorXd PairwiseSum::sum() const
{
    if (stack_.empty()) return {};
    Eigen::VectorXd acc = stack_.back().second;
    for (std::size_t i = stack_.size() - 1; i-- > 0;) acc = stack_[i].second + acc;
    return acc;
}

// --------------------------------------------------------------- driver

Eigen::VectorXd solve_surface_sample(const SurfaceAssembler& assembler, std::uint64_t seed, std::uint64_t index,
                                     const ExperimentOptions& options)
{
    const GeometrySample sample = draw_sample(seed, index, ProblemKind::Surface, options.params);
    const auto& pts = assembler.lifted_points();
    std::vector<double> load(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) load[i] = manufactured_surface_load(sample, pts[i]);
    return solve_cg(assembler.assemble(sample.surface(), load), options.cg_tol).values;
}

Eigen::VectorXd solve_coupled_sample(const CoupledAssembler& assembler, std::uint64_t seed, std::uint64_t index,
                                     const ExperimentOptions& options)
{
    const GeometrySample sample = draw_sample(seed, index, ProblemKind::BulkSurface, options.params);
    const auto& bulk = assembler.bulk_points();
    const auto& bnd = assembler.boundary_points();
    std::vector<double> f(bulk.size()), fg(bnd.size());
    for (std::size_t i = 0; i < bulk.size(); ++i) f[i] = manufactured_bulk_load(sample, bulk[i]);
    for (std::size_t i = 0; i < bnd.size(); ++i) {
        fg[i] = manufactured_surface_load_coupled(sample, bnd[i], assembler.alpha(), assembler.beta());
    }
    return solve_cg(assembler.assemble(sample.boundary(), f, fg), options.cg_tol).values;
}

namespace {

using Clock = std::chrono::steady_clock;

/// Means over sample prefixes of lengths `prefixes` (sorted, unique).
template <class Solve>
std::map<std::size_t, Eigen::VectorXd> prefix_means(const std::vector<std::size_t>& prefixes,
                                                    const ExperimentOptions& opt, int level, Solve&& solve)
{
    std::map<std::size_t, Eigen::VectorXd> out;
    const std::size_t total = prefixes.back();
    const std::size_t chunk = std::max<std::size_t>(1, 4 * static_cast<std::size_t>(std::max(opt.threads, 1)));
    std::vector<Eigen::VectorXd> slots(chunk);
    PairwiseSum acc;
    auto next_prefix = prefixes.begin();
    const auto start = Clock::now();
    for (std::size_t first = 0; first < total; first += chunk) {
        const std::size_t count = std::min(chunk, total - first);
        detail::parallel_for(count, opt.threads,
                             [&](std::size_t k) { slots[k] = solve(opt.first_sample + first + k); });
        for (std::size_t k = 0; k < count; ++k) {
            acc.push(std::move(slots[k]));
            if (acc.count() == *next_prefix) {
                out.emplace(acc.count(), acc.sum() / static_cast<double>(acc.count()));
                if (opt.progress) {
                    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
                    std::ostringstream msg;
                    msg << "level " << level << ": " << acc.count() << "/" << total << " samples, " << secs << " s";
                    opt.progress(msg.str());
                }
                ++next_prefix;
            }
        }
    }
    return out;
}

std::vector<std::string> groups_for(ProblemKind problem, NormKind norm)
{
    std::vector<std::string> norms;
    if (norm != NormKind::H1) norms.push_back("l2");
    if (norm != NormKind::L2) norms.push_back("h1");
    if (problem == ProblemKind::Surface) return norms;
    std::vector<std::string> out;
    for (const auto& n : norms) {
        out.push_back("bulk_" + n);
        out.push_back("surface_" + n);
    }
    return out;
}

std::vector<double> pick_errors(NormKind norm, const std::vector<ErrorNorms>& parts)
{
    std::vector<double> out;
    if (norm != NormKind::H1)
        for (const auto& e : parts) out.push_back(e.l2);
    if (norm != NormKind::L2)
        for (const auto& e : parts) out.push_back(e.h1);
    return out;
}

} // namespace

Eigen::VectorXd monte_carlo_mean(ProblemKind problem, int level, std::uint64_t seed, std::uint64_t first,
                                 std::size_t count, const ExperimentOptions& options)
{
    if (count == 0) throw std::invalid_argument("monte_carlo_mean: count must be >= 1");
    ExperimentOptions opt = options;
    opt.first_sample = first;
    opt.progress = nullptr;
    if (problem == ProblemKind::Surface) {
        const SurfaceMesh mesh = build_icosphere(level);
        const SurfaceAssembler assembler(mesh);
        return prefix_means({count}, opt, level, [&](std::uint64_t i) {
                   return solve_surface_sample(assembler, seed, i, opt);
               }).at(count);
    }
    const BulkMesh mesh = build_disk_mesh(level);
    const CoupledAssembler assembler(mesh, opt.alpha, opt.beta);
    return prefix_means({count}, opt, level, [&](std::uint64_t i) {
               return solve_coupled_sample(assembler, seed, i, opt);
           }).at(count);
}

std::vector<ConvergenceTable> run_convergence(const std::vector<Schedule>& schedules,
                                              const ExperimentOptions& options)
{
    if (schedules.empty()) throw std::invalid_argument("run_convergence: no schedules");
    const ProblemKind problem = schedules.front().problem;
    const std::uint64_t seed = schedules.front().master_seed;
    std::map<int, std::set<std::size_t>> needed;
    std::vector<ConvergenceTable> tables;
    for (const Schedule& s : schedules) {
        s.validate();
        if (s.problem != problem || s.master_seed != seed) {
            throw std::invalid_argument("run_convergence: shared schedules must agree on problem and seed");
        }
        for (const auto& r : s.rows) needed[r.level].insert(r.samples);
        ConvergenceTable t;
        t.problem = problem;
        t.norm = s.norm;
        t.seed = seed;
        t.groups = groups_for(problem, s.norm);
        t.rows.resize(s.rows.size());
        tables.push_back(std::move(t));
    }

    for (const auto& [level, counts] : needed) {
        const std::vector<std::size_t> prefixes(counts.begin(), counts.end());
        double h = 0.0;
        // Row errors for each needed M: l2/h1 for each component.
        std::map<std::size_t, std::vector<ErrorNorms>> norms;
        if (problem == ProblemKind::Surface) {
            const SurfaceMesh mesh = build_icosphere(level);
            h = mesh.h_max;
            const SurfaceAssembler assembler(mesh);
            const auto means = prefix_means(prefixes, options, level, [&](std::uint64_t i) {
                return solve_surface_sample(assembler, seed, i, options);
            });
            for (const auto& [m, mean] : means) {
                norms[m] = {error_norms(
                    mesh, mean, [](const Vec3& p) { return expected_surface_solution(p).value; },
                    [](const Vec3& p) { return Vec3(tangent_projection<3>(p) * expected_surface_solution(p).grad); })};
            }
        } else {
            const BulkMesh mesh = build_disk_mesh(level);
            h = mesh.h_max;
            const CoupledAssembler assembler(mesh, options.alpha, options.beta);
            const auto means = prefix_means(prefixes, options, level, [&](std::uint64_t i) {
                return solve_coupled_sample(assembler, seed, i, options);
            });
            const ReferenceTrace ref = cached_reference(boundary_quadrature_points(mesh), level, seed, options);
            const int nb = static_cast<int>(mesh.vertices.size());
            for (const auto& [m, mean] : means) {
                const Eigen::VectorXd bulk = mean.head(nb);
                const Eigen::VectorXd surf = mean.tail(mean.size() - nb);
                norms[m] = {bulk_error_norms(
                                mesh, bulk, [](const Vec2& x) { return expected_bulk_solution(x).value; },
                                [](const Vec2& x) { return expected_bulk_solution(x).grad; }),
                            boundary_error_norms(mesh, surf, ref.values, ref.grads)};
            }
        }
        for (std::size_t k = 0; k < schedules.size(); ++k) {
            const Schedule& s = schedules[k];
            for (std::size_t i = 0; i < s.rows.size(); ++i) {
                if (s.rows[i].level != level) continue;
                TableRow& row = tables[k].rows[i];
                row.h = h;
                row.samples = s.rows[i].samples;
                row.errors = pick_errors(s.norm, norms.at(row.samples));
            }
        }
    }
    for (auto& t : tables) fill_eoc(t);
    return tables;
}

ConvergenceTable run_convergence(const Schedule& schedule, const ExperimentOptions& options)
{
    return run_convergence(std::vector<Schedule>{schedule}, options).front();
}

} // namespace stochfem
