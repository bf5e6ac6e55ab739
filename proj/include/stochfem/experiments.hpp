#pragma once

// Manufactured solutions and data for the two model problems, the
// Monte-Carlo driver producing convergence tables, and EOC bookkeeping.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stochfem/fem.hpp"
#include "stochfem/random_field.hpp"

namespace stochfem {

template <int Dim>
struct SolutionValue {
    double value = 0.0;
    Vec<Dim> grad = Vec<Dim>::Zero();  // ambient gradient
};

template <int Dim>
using SolutionField = std::function<SolutionValue<Dim>(const Vec<Dim>&)>;

inline constexpr double kLoadFdStep = 1e-5;

// ------------------------------------------------------------ surface problem

SolutionValue<3> exact_surface_solution(const SolutionRandoms& r, const Vec3& p);
SolutionValue<3> expected_surface_solution(const Vec3& p);

/// -(1/sqrt g) div(sqrt g G^{-1} grad u) + u on S^2 for an arbitrary solution u;
/// the outer divergence is a central difference along a tangent frame.
double surface_load(const SurfaceHeightSample& s, const SolutionField<3>& u, const Vec3& p);
double manufactured_surface_load(const GeometrySample& sample, const Vec3& p);

// ------------------------------------------------------- bulk-surface problem

SolutionValue<2> exact_bulk_solution(const SolutionRandoms& r, const Vec2& x);
SolutionValue<2> expected_bulk_solution(const Vec2& x);

/// v = (alpha u + conormal . grad u) / beta at a point of S^1.
double robin_trace(const BoundaryHeightSample& s, const SolutionField<2>& u, const Vec2& p, double alpha,
                   double beta);
double manufactured_robin_trace(const GeometrySample& sample, const Vec2& p, double alpha, double beta);

/// Bulk load at x in the closed unit disk; ambient central differences of
/// the flux sqrt g G^{-1} grad u.
double bulk_load(const BoundaryHeightSample& s, const SolutionField<2>& u, const Vec2& x);
double manufactured_bulk_load(const GeometrySample& sample, const Vec2& x);

/// Surface load on S^1; the robin trace is differentiated in the angle.
double coupled_surface_load(const BoundaryHeightSample& s, const SolutionField<2>& u, const Vec2& p, double alpha,
                            double beta);
double manufactured_surface_load_coupled(const GeometrySample& sample, const Vec2& p, double alpha, double beta);

/// Monte-Carlo estimate of E[v] at points of S^1, with the angular
/// derivative of the averaged field expressed as a tangential gradient.
struct ReferenceTrace {
    std::vector<double> values;
    std::vector<Vec2> grads;
};

inline constexpr std::uint64_t kReferenceSeedOffset = std::uint64_t{1} << 32;
inline constexpr std::size_t kDefaultReferenceSamples = 100000;

/// Samples are drawn with master seed `seed + 2^32`.
ReferenceTrace reference_expected_v(const std::vector<Vec2>& points, std::uint64_t seed, std::size_t m_ref,
                                    const SampleParams& params, double alpha, double beta, int threads = 1);
double reference_expected_v(const Vec2& p, std::uint64_t seed, std::size_t m_ref, const SampleParams& params,
                            double alpha, double beta);

// --------------------------------------------------------------- MC driver

/// Both pairs every row with the L2 and the H1 error of the same estimator.
enum class NormKind { L2, H1, Both };

struct LevelSamples {
    int level = 0;
    std::size_t samples = 1;
};

struct Schedule {
    ProblemKind problem = ProblemKind::Surface;
    NormKind norm = NormKind::L2;
    std::vector<LevelSamples> rows;
    std::uint64_t master_seed = 42;

    void validate() const;
};

/// M = 16^i (L2) or 64 * 4^i (H1, Both) for the i-th level of the range.
Schedule balanced_schedule(ProblemKind problem, NormKind norm, int first_level, int last_level,
                        std::uint64_t master_seed = 42);

struct ExperimentOptions {
    SampleParams params;
    double alpha = 1.0;
    double beta = 1.0;
    double cg_tol = kDefaultCgTolerance;
    int threads = 1;
    std::size_t reference_samples = kDefaultReferenceSamples;
    std::filesystem::path cache_dir;  // empty: no disk cache for reference traces
    std::uint64_t first_sample = 0;
    std::function<void(const std::string&)> progress;
};

struct TableRow {
    double h = 0.0;
    std::size_t samples = 0;
    std::vector<double> errors;  // one per column group
    std::vector<std::optional<double>> eoc_h;
    std::vector<std::optional<double>> eoc_M;
};

struct ConvergenceTable {
    ProblemKind problem = ProblemKind::Surface;
    NormKind norm = NormKind::L2;
    std::uint64_t seed = 0;
    std::vector<std::string> groups;  // e.g. "l2", or "bulk_h1" and "surface_h1"
    std::vector<TableRow> rows;
};

double eoc(double error_prev, double error, double param_prev, double param);

/// Recompute both eoc columns from errors, h and M.
void fill_eoc(ConvergenceTable& table);

/// Cumulative sum of vectors with a fixed binary-tree pairing in push order.
/// The result depends only on the sequence of pushed vectors.
class PairwiseSum {
public:
    void push(Eigen::VectorXd v);
    Eigen::VectorXd sum() const;
    std::size_t count() const { return count_; }

private:
    std::vector<std::pair<std::size_t, Eigen::VectorXd>> stack_;
    std::size_t count_ = 0;
};

/// Path-wise nodal solution for sample `index`.
Eigen::VectorXd solve_surface_sample(const SurfaceAssembler& assembler, std::uint64_t seed, std::uint64_t index,
                                     const ExperimentOptions& options);
Eigen::VectorXd solve_coupled_sample(const CoupledAssembler& assembler, std::uint64_t seed, std::uint64_t index,
                                     const ExperimentOptions& options);

/// E_M of the nodal vectors for samples first, ..., first + count - 1.
Eigen::VectorXd monte_carlo_mean(ProblemKind problem, int level, std::uint64_t seed, std::uint64_t first,
                                 std::size_t count, const ExperimentOptions& options);

ConvergenceTable run_convergence(const Schedule& schedule, const ExperimentOptions& options);

/// Several schedules over the same problem and seed share their sample
/// solves: at every level the largest M is solved once and smaller M use
/// prefix means.
std::vector<ConvergenceTable> run_convergence(const std::vector<Schedule>& schedules,
                                              const ExperimentOptions& options);

const char* to_string(ProblemKind problem);
const char* to_string(NormKind norm);

} // namespace stochfem
