#pragma once

#include "spectral/model.hpp"
#include "spectral/multibasis.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spectral {

/// Sparse affine function sum_i value[i] * v[index[i]] + constant, indices ascending.
struct AffineRow {
    std::vector<std::uint32_t> index;
    std::vector<double> value;
    double constant = 0.0;

    bool has_variables() const { return !index.empty(); }
    /// No variables and a zero constant: the row reads 0 (= or <=) 0.
    bool structurally_zero() const { return index.empty() && constant == 0.0; }
    double evaluate(std::span<const double> v) const;
};

/// Basis built from the Askey families of the model's germs, in model order.
std::shared_ptr<const MultiIndexBasis> make_basis(const StochModel& model, int max_degree);

/// lambda for a target violation probability: Gaussian quantile Phi^-1(1 - eps),
/// or the distribution-free Cantelli bound sqrt((1 - eps) / eps).
double safety_factor(double epsilon, bool cantelli = false);

struct ProjectionSettings {
    double lambda = 1.645;
    /// When set, every inequality without its own eps uses safety_factor(epsilon).
    std::optional<double> epsilon;
    bool cantelli = false;
    /// Keep only the retained modes of products whose exact expansion needs
    /// degree > max_degree, instead of rejecting them.
    bool allow_truncation = false;
};

/**
 * Layout of the coefficient-space variables: first-stage scalars (constant
 * mode only) come first in model order, followed by |A| coefficients per
 * second-stage scalar with the basis index running fastest.
 */
class CoefficientLayout {
public:
    CoefficientLayout(const StochModel& model, std::size_t basis_size);

    std::size_t first_stage_count() const { return first_; }
    std::size_t recourse_count() const { return second_; }
    std::size_t basis_size() const { return basis_; }
    std::size_t size() const { return first_ + second_ * basis_; }

    std::uint32_t first_stage(std::size_t stage_position) const {
        return static_cast<std::uint32_t>(stage_position);
    }
    std::uint32_t coefficient(std::size_t stage_position, std::size_t mode) const {
        return static_cast<std::uint32_t>(first_ + stage_position * basis_ + mode);
    }

private:
    std::size_t first_;
    std::size_t second_;
    std::size_t basis_;
};

struct ProjectedEquality {
    std::uint32_t source;  // constraint index in the model
    std::uint32_t mode;    // basis index the residual was tested against
    AffineRow row;         // row == 0
};

struct ProjectedLinear {
    std::uint32_t source;
    AffineRow row;         // row <= 0
};

/// mean + lambda * || spread || <= 0
struct ProjectedCone {
    std::uint32_t source;
    double lambda;
    AffineRow mean;
    std::vector<std::uint32_t> modes;
    std::vector<AffineRow> spread;
};

struct ProjectionReport {
    std::size_t basis_size = 0;
    std::size_t variables = 0;
    std::size_t first_stage = 0;
    std::size_t coefficients = 0;
    std::size_t equalities = 0;
    std::size_t trivial_equalities = 0;
    std::size_t linear_inequalities = 0;
    std::size_t cones = 0;
    std::size_t cone_rows = 0;
    std::size_t truncated_terms = 0;
};

/**
 * Deterministic coefficient-space program. Every source equality contributes
 * one row per basis function (rows that reduce to 0 = 0 are kept and flagged
 * by AffineRow::structurally_zero); every source inequality contributes a cone
 * or, when its spread is structurally zero or constant, a linear row.
 */
struct ProjectedProgram {
    std::shared_ptr<const MultiIndexBasis> basis;
    CoefficientLayout layout;
    std::vector<ProjectedEquality> equalities;
    std::vector<ProjectedLinear> linear_inequalities;
    std::vector<ProjectedCone> cones;
    AffineRow objective;  // expected cost = constant mode of the cost expansion
    std::size_t truncated_terms = 0;

    ProjectionReport report() const;
    std::string variable_name(const StochModel& model, std::size_t index) const;
};

/// Maps each scalar to its coefficient variables: one per first-stage scalar,
/// |A| per second-stage scalar.
std::vector<std::vector<std::uint32_t>> expand_recourse(const StochModel& model, const MultiIndexBasis& basis);

/// Galerkin rows of one expression: out[alpha] = <expr, Psi_alpha>.
std::vector<AffineRow> project_expression(const StochModel& model, const MultiIndexBasis& basis,
                                          const CoefficientLayout& layout, std::span<const Term> terms,
                                          bool allow_truncation, std::size_t* truncated = nullptr,
                                          bool constant_mode_only = false);

std::vector<ProjectedEquality> project_equality(const StochModel& model, const MultiIndexBasis& basis,
                                                const CoefficientLayout& layout, std::size_t constraint,
                                                bool allow_truncation = false,
                                                std::size_t* truncated = nullptr);

/// Returns the cone, or a linear row when the spread is degenerate.
struct InequalityProjection {
    std::optional<ProjectedCone> cone;
    std::optional<ProjectedLinear> linear;
};
InequalityProjection project_inequality(const StochModel& model, const MultiIndexBasis& basis,
                                        const CoefficientLayout& layout, std::size_t constraint, double lambda,
                                        bool allow_truncation = false, std::size_t* truncated = nullptr);

AffineRow project_objective(const StochModel& model, const MultiIndexBasis& basis, const CoefficientLayout& layout);

ProjectedProgram project_model(const StochModel& model, std::shared_ptr<const MultiIndexBasis> basis,
                               const ProjectionSettings& settings = {});

/**
 * Solved coefficients as a map from realizations to decisions:
 * z(omega) = sum_alpha z_alpha Psi_alpha(standardize(omega)).
 */
class RecoursePolicy {
public:
    RecoursePolicy(const StochModel& model, std::shared_ptr<const MultiIndexBasis> basis,
                   std::vector<double> first_stage, std::vector<double> coefficients);

    /// Reads the policy out of a solution vector laid out as in CoefficientLayout.
    static RecoursePolicy from_solution(const StochModel& model, const ProjectedProgram& program,
                                        std::span<const double> solution);

    const MultiIndexBasis& basis() const { return *basis_; }
    const std::vector<double>& first_stage() const { return first_stage_; }
    /// Row-major: recourse scalar (stage order) x basis index.
    const std::vector<double>& coefficients() const { return coefficients_; }
    std::span<const double> coefficients_of(std::size_t recourse) const;

    std::vector<double> standardize(std::span<const double> omega) const;
    /// True when every component lies in its germ's support.
    bool in_support(std::span<const double> omega) const;

    /// Second-stage values in stage order.
    std::vector<double> evaluate(std::span<const double> omega) const;
    /// All model scalars (first and second stage) at omega, in model order.
    void evaluate_scalars(std::span<const double> omega, std::span<double> scalars,
                          std::vector<double>& workspace) const;

private:
    std::vector<std::uint32_t> first_scalars_;
    std::vector<std::uint32_t> second_scalars_;
    std::size_t scalar_count_;
    std::shared_ptr<const MultiIndexBasis> basis_;
    std::vector<double> first_stage_;
    std::vector<double> coefficients_;
    std::vector<AffineMap> transforms_;
    std::vector<Distribution> distributions_;
};

} // namespace spectral
