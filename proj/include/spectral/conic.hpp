#pragma once

#include "spectral/galerkin.hpp"
#include "spectral/model.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spectral {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/**
 * Conic program in the canonical form
 *
 *     minimize    c'x + offset
 *     subject to  A x = b
 *                 G x + s = h,   s in R+^l x Q^{q_1} x ... x Q^{q_k}
 *
 * where Q^q = { (t, u) : ||u|| <= t } is the second-order cone of dimension q.
 * The first l rows of G are linear inequalities G_i x <= h_i; every following
 * block of q_j rows is one cone, i.e. ||h_u - G_u x|| <= h_t - G_t x.
 *
 * A projected chance constraint mean(v) + lambda ||spread(v)|| <= 0 is stored
 * as the block t = -mean(v) / lambda, u = spread(v): its first row carries
 * G = a_0 / lambda, h = -c_0 / lambda and each spread row G = -a_k, h = c_k.
 */
struct ConicProblem {
    std::size_t variables = 0;
    std::vector<double> c;
    double offset = 0.0;
    SparseMatrix A;
    std::vector<double> b;
    SparseMatrix G;
    std::vector<double> h;
    std::size_t linear_rows = 0;
    std::vector<std::size_t> soc_sizes;

    std::size_t equality_rows() const { return b.size(); }
    std::size_t cone_rows() const { return h.size(); }
    /// Throws InputError when dimensions, cone sizes or entries are inconsistent.
    void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

std::string_view to_string(SolveStatus status);

struct SolveSettings {
    double feasibility_tolerance = 1e-8;
    double absolute_gap_tolerance = 1e-8;
    double relative_gap_tolerance = 1e-8;
    int max_iterations = 150;
    int equilibration_passes = 15;
    double static_regularization = 1e-8;
    int refinement_steps = 6;
};

struct SolveDiagnostics {
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    double relative_gap = 0.0;
    double solve_seconds = 0.0;
    std::string message;
};

struct SolveResult {
    SolveStatus status = SolveStatus::numerical_failure;
    double objective = 0.0;
    /// Primal solution; empty unless status is optimal.
    std::vector<double> x;
    /// Multipliers of the equality and conic rows; empty unless optimal.
    std::vector<double> y;
    std::vector<double> z;
    SolveDiagnostics diagnostics;

    bool optimal() const { return status == SolveStatus::optimal; }
};

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling.
SolveResult solve(const ConicProblem& problem, const SolveSettings& settings = {});

/// Equalities (minus rows reading 0 = 0), linear rows, then cones in source order.
ConicProblem assemble(const ProjectedProgram& program);

/**
 * Deterministic equivalent of a finite scenario set. Columns: first-stage
 * scalars in stage order, then one copy of the second-stage scalars per
 * scenario. Constraints mentioning neither a second-stage scalar nor a germ are
 * written once; all others once per scenario. `scenarios` is row-major
 * (scenario x germ) in natural units.
 */
ConicProblem assemble_extensive_form(const StochModel& model, std::span<const double> scenarios,
                                     std::span<const double> probabilities);

/**
 * Versioned text dump:
 *
 *     spectral-conic 1
 *     dims <variables> <equality rows> <cone rows> <linear rows> <soc count>
 *     soc <q_1> ... <q_k>
 *     offset <value>
 *     c <count>            followed by "<index> <value>" lines (non-zeros)
 *     A <nnz>              followed by "<row> <col> <value>" lines, column-major
 *     b <count>            followed by "<index> <value>" lines (non-zeros)
 *     G <nnz>
 *     h <count>
 *     end
 *
 * Values are written in shortest round-trip form.
 */
void dump(std::ostream& out, const ConicProblem& problem);
void dump(const std::filesystem::path& path, const ConicProblem& problem);
ConicProblem load(std::istream& in);
ConicProblem load(const std::filesystem::path& path);

} // namespace spectral
