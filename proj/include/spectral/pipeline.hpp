#pragma once

#include "spectral/conic.hpp"
#include "spectral/galerkin.hpp"
#include "spectral/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace spectral {

struct PceSettings {
    int degree = 1;
    ProjectionSettings projection;
    SolveSettings solver;
};

/// Everything produced by one intrusive solve.
struct PceRun {
    std::shared_ptr<const MultiIndexBasis> basis;
    std::optional<ProjectedProgram> program;
    ProjectionReport report;
    SolveResult result;
    std::optional<RecoursePolicy> policy;  // set when the solve is optimal
    double project_seconds = 0.0;
    double solve_seconds = 0.0;

    bool ok() const { return result.optimal(); }
    double seconds() const { return project_seconds + solve_seconds; }
};

/// Basis, projection, conic assembly and solve.
PceRun solve_pce(const StochModel& model, const PceSettings& settings = {});

/// Model from a file: a JSON instance config (".json") or the model text format.
StochModel load_model_or_instance(const std::filesystem::path& path);

/**
 * Solved policy as text, version 1:
 *
 *     spectral-solution 1
 *     degree <N^d>
 *     objective <value>
 *     first <count>       followed by one value per line, stage order
 *     coefficients <recourse count> <basis size>   followed by one row per recourse scalar
 *     end
 */
void write_solution(std::ostream& out, const RecoursePolicy& policy, double objective);
struct StoredSolution {
    int degree = 0;
    double objective = 0.0;
    std::vector<double> first_stage;
    std::vector<double> coefficients;
};
StoredSolution read_solution(std::istream& in);
/// Rebuilds the policy; rejects solutions whose sizes do not match the model.
RecoursePolicy restore_policy(const StochModel& model, const StoredSolution& solution);

/// "name,step,value" for every first-stage scalar.
void write_first_stage_csv(std::ostream& out, const StochModel& model, const std::vector<double>& first_stage);
/// "variable,mode,multi_index,value" for every recourse coefficient.
void write_coefficients_csv(std::ostream& out, const StochModel& model, const RecoursePolicy& policy);

} // namespace spectral
