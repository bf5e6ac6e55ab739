#pragma once

// Command-line configuration and experiment orchestration.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "stochfem/experiments.hpp"

namespace stochfem {

/// Upper bound on eps_tol and sigma_tol accepted from the command line.
inline constexpr double kMaxAmplitude = 0.3;

struct RunConfig {
    ProblemKind problem = ProblemKind::Surface;
    NormKind norm = NormKind::L2;
    int level_first = 3;
    int level_last = 6;
    std::vector<std::size_t> m_schedule;  // empty: balanced schedule for the norm
    std::uint64_t seed = 42;
    double alpha = 1.0;
    double beta = 1.0;
    double eps_tol = 0.1;
    double sigma_tol = 0.1;
    double delta = 0.4;
    std::filesystem::path out_dir = "results";
    int export_samples = 0;
    int repeat = 1;
    int threads = 1;
    std::size_t reference_samples = kDefaultReferenceSamples;
    double cg_tol = kDefaultCgTolerance;
    bool quiet = false;
};

using EnvLookup = std::function<const char*(const char*)>;

/// Parses flags (args excludes the program name). A --config file of flat
/// `key = value` lines supplies defaults that flags override; unknown keys
/// are rejected. Throws UsageError.
RunConfig parse_config(const std::vector<std::string>& args, const EnvLookup& env = nullptr);

/// Help text listing every flag.
std::string usage();

/// One schedule per repetition (seed, seed + 1, ...). With the automatic M
/// schedule, norm "both" uses the H1 pairing.
std::vector<Schedule> schedules_for(const RunConfig& config);

ExperimentOptions experiment_options(const RunConfig& config);

/// Results are written to out_dir/<problem>_<norm>_seed<seed>.csv.
std::filesystem::path table_path(const RunConfig& config, std::uint64_t seed);

/// Writes deformed meshes with path-wise solutions for samples 0..n-1 on the
/// finest level into out_dir/vtk. Returns the written files.
std::vector<std::filesystem::path> export_realisations(const RunConfig& config, int n);

/// Runs every repetition, writes CSV files and prints console tables.
/// Returns the process exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Entry point used by the executable: parse, run, map errors to exit codes
/// (2 for usage errors, 1 for failures).
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace stochfem
