#pragma once

#include "spectral/conic.hpp"
#include "spectral/model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace spectral {

/// One scenario-approximation solve.
struct SaRun {
    std::size_t scenarios = 0;
    std::uint64_t seed = 0;
    SolveStatus status = SolveStatus::numerical_failure;
    double objective = 0.0;
    std::vector<double> first_stage;  // stage order
    double assemble_seconds = 0.0;
    double solve_seconds = 0.0;
    int iterations = 0;
    std::string message;

    bool ok() const { return status == SolveStatus::optimal; }
    double seconds() const { return assemble_seconds + solve_seconds; }
};

/// LHS scenarios, extensive form, solve. When the extensive form is infeasible
/// the message lists scenarios that are infeasible on their own.
SaRun solve_sa(const StochModel& model, std::size_t n_s, std::uint64_t seed, const SolveSettings& settings = {});

/// Runs every (n_s, repetition) pair; repetition r uses seed base_seed + r.
/// Results are ordered by grid position, then repetition.
std::vector<SaRun> run_sa_grid(const StochModel& model, const std::vector<std::size_t>& grid, std::size_t repetitions,
                               std::uint64_t base_seed, const SolveSettings& settings = {}, std::size_t threads = 0);

struct ComparisonRow {
    std::string decision;  // first-stage block name
    std::size_t step = 0;  // flat index inside the block
    double weight = 1.0;   // hours represented by the step
    double candidate = 0.0;
    double reference = 0.0;  // mean over the reference runs
    double envelope_min = 0.0;
    double envelope_max = 0.0;
    bool inside = false;
};

struct ComparisonReport {
    double candidate_objective = 0.0;
    double reference_objective = 0.0;
    double gap_absolute = 0.0;
    double gap_relative = 0.0;
    std::size_t reference_runs = 0;
    std::vector<ComparisonRow> rows;
    /// Root of the mean squared per-step error over the horizon, per block.
    std::map<std::string, double> rmse;
    /// Weighted share of steps inside the min-max envelope.
    double coverage = 0.0;
};

/**
 * Compares a candidate first-stage solution against repeated runs: objective gap
 * against the mean run objective, per-step errors against the mean run
 * trajectory, and coverage of the min-max envelope of the runs. `weights` maps a
 * block name to the hours one of its steps represents (default 1). A point counts
 * as inside when it is within `tolerance` (absolute, scaled by 1 + |value|) of
 * the envelope.
 */
ComparisonReport compare(const StochModel& model, double candidate_objective, const std::vector<double>& candidate,
                         const std::vector<SaRun>& runs, const std::map<std::string, double>& weights = {},
                         double tolerance = 1e-6);

/// Per-step RMSE of several trajectories against a reference, averaged over the
/// steps of each first-stage block.
std::map<std::string, double> trajectory_rmse(const StochModel& model, const std::vector<SaRun>& runs,
                                              const std::vector<double>& reference);

/// Mean first-stage trajectory of the given runs.
std::vector<double> mean_trajectory(const std::vector<SaRun>& runs);

void write_comparison_csv(std::ostream& out, const ComparisonReport& report);
void write_runs_csv(std::ostream& out, const std::vector<SaRun>& runs, bool include_timing);

} // namespace spectral
