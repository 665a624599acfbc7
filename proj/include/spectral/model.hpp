#pragma once

#include "spectral/polybasis.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spectral {

enum class Stage { first, second };
enum class Sense { equal, less_equal };

std::string_view to_string(Stage stage);
std::string_view to_string(Sense sense);

/// One scalar decision variable, by its position in the model.
struct ScalarVar {
    std::uint32_t index;
};

/// One germ, by its position in the model.
struct GermRef {
    std::uint32_t index;
};

/// A named, shaped block of scalar variables sharing a stage.
struct VarBlock {
    std::uint32_t id = 0;
    std::uint32_t offset = 0;
    std::uint32_t size = 0;

    ScalarVar operator[](std::size_t i) const;
};

/// Product of a coefficient with any number of germs and variables. Only
/// monomials with at most one germ and at most one variable are admissible;
/// the check happens when the expression is handed to the model.
struct Monomial {
    double coef = 0.0;
    std::vector<std::uint32_t> germs;
    std::vector<std::uint32_t> vars;
};

class Expression {
public:
    Expression() = default;
    Expression(double constant);  // NOLINT(google-explicit-constructor)
    Expression(ScalarVar var);    // NOLINT(google-explicit-constructor)
    Expression(GermRef germ);     // NOLINT(google-explicit-constructor)

    const std::vector<Monomial>& monomials() const { return monomials_; }

    Expression& operator+=(const Expression& other);
    Expression& operator-=(const Expression& other);
    Expression& operator*=(double factor);

    friend Expression operator+(Expression a, const Expression& b) { return a += b; }
    friend Expression operator-(Expression a, const Expression& b) { return a -= b; }
    friend Expression operator-(Expression a) { return a *= -1.0; }
    friend Expression operator*(const Expression& a, const Expression& b);

private:
    std::vector<Monomial> monomials_;
};

/// Validated monomial: coef * [germ] * [var]; -1 marks an absent factor.
struct Term {
    double coef = 0.0;
    std::int32_t germ = -1;
    std::int32_t var = -1;

    friend bool operator==(const Term&, const Term&) = default;
};

struct Variable {
    std::string name;
    Stage stage;
    std::vector<std::size_t> shape;
    std::uint32_t offset;
    std::uint32_t size;
};

struct Germ {
    std::string name;
    Distribution distribution;
    StandardizedGerm standardized;
    bool declared_unused = false;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense;
    std::optional<double> epsilon;
};

/// Sizes reported by finalize().
struct ModelSummary {
    std::size_t first_stage = 0;
    std::size_t second_stage = 0;
    std::size_t germs = 0;
    std::size_t equalities = 0;
    std::size_t inequalities = 0;
};

/**
 * A two-stage stochastic LP whose uncertain coefficients are affine in
 * independent germs (natural units). Variables, germs and constraints are
 * appended until finalize(); afterwards the model is immutable.
 */
class StochModel {
public:
    VarBlock add_variable(const std::string& name, Stage stage, std::vector<std::size_t> shape = {});
    GermRef add_germ(const std::string& name, const Distribution& distribution, bool declared_unused = false);
    /// Only rho == 0 is accepted; dependent inputs must be decorrelated first.
    void declare_correlation(GermRef a, GermRef b, double rho);

    std::size_t add_constraint(const Expression& expr, Sense sense, std::optional<double> epsilon = std::nullopt,
                               std::string name = {});
    void set_objective(const Expression& expr);
    ModelSummary finalize();

    bool finalized() const { return finalized_; }
    ModelSummary summary() const;

    const std::vector<Variable>& variables() const { return variables_; }
    const std::vector<Germ>& germs() const { return germs_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<Term>& objective() const { return objective_; }
    bool has_objective() const { return has_objective_; }

    std::size_t scalar_count() const { return scalar_stage_.size(); }
    Stage stage_of(std::size_t scalar) const { return scalar_stage_.at(scalar); }
    std::string scalar_name(std::size_t scalar) const;
    const Variable& block_of(std::size_t scalar) const;

    /// Stage-local numbering: position of a scalar among the first (second) stage scalars.
    std::size_t stage_position(std::size_t scalar) const { return stage_position_.at(scalar); }
    const std::vector<std::uint32_t>& first_stage_scalars() const { return first_stage_; }
    const std::vector<std::uint32_t>& second_stage_scalars() const { return second_stage_; }

    std::optional<VarBlock> find_variable(const std::string& name) const;
    std::optional<GermRef> find_germ(const std::string& name) const;

    /// Human-readable rendering of a term ("2.5*xi_L*p[3]").
    std::string describe(const Term& term) const;

private:
    void require_open(const char* what) const;
    void check_name(const std::string& name) const;
    std::vector<Term> compile(const Expression& expr, const std::string& context) const;

    std::vector<Variable> variables_;
    std::vector<Germ> germs_;
    std::vector<Constraint> constraints_;
    std::vector<Term> objective_;
    bool has_objective_ = false;
    bool finalized_ = false;

    std::vector<Stage> scalar_stage_;
    std::vector<std::uint32_t> scalar_block_;
    std::vector<std::size_t> stage_position_;
    std::vector<std::uint32_t> first_stage_;
    std::vector<std::uint32_t> second_stage_;
};

/// Value of `terms` for the given scalar values and natural-unit realization.
double evaluate_terms(std::span<const Term> terms, std::span<const double> scalars, std::span<const double> omega);

/// Copy of a model with every germ replaced by its mean and no germs left.
StochModel freeze_germs(const StochModel& model);

/// Natural-unit means of all germs.
std::vector<double> germ_means(const StochModel& model);

} // namespace spectral
