#include "spectral/galerkin.hpp"

#include "spectral/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace spectral {

double AffineRow::evaluate(std::span<const double> v) const {
    double acc = constant;
    for (std::size_t i = 0; i < index.size(); ++i) acc += value[i] * v[index[i]];
    return acc;
}

namespace {

/// Accumulates coefficients per variable and emits a sorted AffineRow.
class RowBuilder {
public:
    void add(std::uint32_t var, double coef) {
        if (coef != 0.0) coefs_[var] += coef;
    }
    void add_constant(double c) { constant_ += c; }

    AffineRow build() const {
        AffineRow row;
        row.constant = constant_;
        for (const auto& [var, coef] : coefs_) {
            if (coef == 0.0) continue;
            row.index.push_back(var);
            row.value.push_back(coef);
        }
        return row;
    }

private:
    std::map<std::uint32_t, double> coefs_;
    double constant_ = 0.0;
};

/// Natural-unit germ as mean + slope * psi_1(y).
struct GermExpansion {
    double mean;
    double slope;
};

GermExpansion germ_expansion(const Germ& germ) {
    const auto& f = germ.standardized.family;
    const auto& t = germ.standardized.transform;
    return {t.offset + t.scale * f.germ_mean_coefficient(), t.scale * f.germ_linear_coefficient()};
}

void check_basis(const StochModel& model, const MultiIndexBasis& basis) {
    if (basis.germ_count() != model.germs().size()) {
        throw InputError("basis has " + std::to_string(basis.germ_count()) + " germs, model has " +
                         std::to_string(model.germs().size()));
    }
    for (std::size_t g = 0; g < basis.germ_count(); ++g) {
        const auto& a = basis.families()[g];
        const auto& b = model.germs()[g].standardized.family;
        if (a.kind() != b.kind() || a.alpha() != b.alpha() || a.beta() != b.beta()) {
            throw InputError("basis family for germ '" + model.germs()[g].name + "' does not match its distribution");
        }
    }
}

} // namespace

std::shared_ptr<const MultiIndexBasis> make_basis(const StochModel& model, int max_degree) {
    std::vector<PolynomialFamily> families;
    families.reserve(model.germs().size());
    for (const auto& g : model.germs()) families.push_back(g.standardized.family);
    return std::make_shared<const MultiIndexBasis>(std::move(families), max_degree);
}

double safety_factor(double epsilon, bool cantelli) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("violation probability must lie in (0, 1)");
    if (cantelli) return std::sqrt((1.0 - epsilon) / epsilon);
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), epsilon));
}

CoefficientLayout::CoefficientLayout(const StochModel& model, std::size_t basis_size)
    : first_(model.first_stage_scalars().size()), second_(model.second_stage_scalars().size()), basis_(basis_size) {}

ProjectionReport ProjectedProgram::report() const {
    ProjectionReport r;
    r.basis_size = layout.basis_size();
    r.variables = layout.size();
    r.first_stage = layout.first_stage_count();
    r.coefficients = layout.recourse_count() * layout.basis_size();
    r.equalities = equalities.size();
    for (const auto& e : equalities) {
        if (e.row.structurally_zero()) ++r.trivial_equalities;
    }
    r.linear_inequalities = linear_inequalities.size();
    r.cones = cones.size();
    for (const auto& c : cones) r.cone_rows += 1 + c.spread.size();
    r.truncated_terms = truncated_terms;
    return r;
}

std::string ProjectedProgram::variable_name(const StochModel& model, std::size_t index) const {
    if (index < layout.first_stage_count()) return model.scalar_name(model.first_stage_scalars()[index]);
    const std::size_t k = index - layout.first_stage_count();
    const std::size_t r = k / layout.basis_size();
    const std::size_t mode = k % layout.basis_size();
    return model.scalar_name(model.second_stage_scalars()[r]) + "#" + std::to_string(mode);
}

std::vector<std::vector<std::uint32_t>> expand_recourse(const StochModel& model, const MultiIndexBasis& basis) {
    check_basis(model, basis);
    const CoefficientLayout layout(model, basis.size());
    std::vector<std::vector<std::uint32_t>> out(model.scalar_count());
    for (std::size_t s = 0; s < model.scalar_count(); ++s) {
        const auto pos = model.stage_position(s);
        if (model.stage_of(s) == Stage::first) {
            out[s] = {layout.first_stage(pos)};
        } else {
            for (std::size_t a = 0; a < basis.size(); ++a) out[s].push_back(layout.coefficient(pos, a));
        }
    }
    return out;
}

std::vector<AffineRow> project_expression(const StochModel& model, const MultiIndexBasis& basis,
                                          const CoefficientLayout& layout, std::span<const Term> terms,
                                          bool allow_truncation, std::size_t* truncated, bool constant_mode_only) {
    const std::size_t modes = constant_mode_only ? 1 : basis.size();
    // the mean-value collapse at degree zero drops every fluctuation by definition
    const bool may_truncate = allow_truncation || basis.max_degree() == 0;
    std::vector<RowBuilder> rows(modes);
    const auto& tensor = basis.triple_tensor();

    auto overflow = [&](const Term& t) {
        if (!may_truncate) {
            throw ModelError("term " + model.describe(t) + " needs polynomial degree " +
                             std::to_string(basis.max_degree() + 1) + " to be projected exactly; raise the degree " +
                             "or allow truncation");
        }
        if (truncated) ++*truncated;
    };

    for (const auto& t : terms) {
        const bool has_germ = t.germ >= 0;
        const bool has_var = t.var >= 0;
        const bool recourse = has_var && model.stage_of(static_cast<std::size_t>(t.var)) == Stage::second;
        const std::size_t pos = has_var ? model.stage_position(static_cast<std::size_t>(t.var)) : 0;

        if (!has_germ) {
            if (!has_var) {
                rows[0].add_constant(t.coef);
            } else if (!recourse) {
                rows[0].add(layout.first_stage(pos), t.coef);
            } else {
                for (std::size_t a = 0; a < modes; ++a) rows[a].add(layout.coefficient(pos, a), t.coef);
            }
            continue;
        }

        const auto g = static_cast<std::size_t>(t.germ);
        const auto ex = germ_expansion(model.germs()[g]);
        const auto lin = basis.linear_mode(g);
        if (!lin && ex.slope != 0.0 && !constant_mode_only) overflow(t);

        if (!has_var) {
            rows[0].add_constant(t.coef * ex.mean);
            if (lin && *lin < modes) rows[*lin].add_constant(t.coef * ex.slope);
        } else if (!recourse) {
            rows[0].add(layout.first_stage(pos), t.coef * ex.mean);
            if (lin && *lin < modes) rows[*lin].add(layout.first_stage(pos), t.coef * ex.slope);
        } else {
            // mean part keeps every mode; the fluctuating part couples modes through M(lin, beta, alpha)
            for (std::size_t a = 0; a < modes; ++a) rows[a].add(layout.coefficient(pos, a), t.coef * ex.mean);
            if (!lin) continue;
            if (!constant_mode_only) overflow(t);
            for (const auto& e : tensor.slice(*lin)) {
                if (e.k >= modes) continue;
                rows[e.k].add(layout.coefficient(pos, e.j), t.coef * ex.slope * e.value);
            }
        }
    }

    std::vector<AffineRow> out;
    out.reserve(modes);
    for (const auto& r : rows) out.push_back(r.build());
    return out;
}

std::vector<ProjectedEquality> project_equality(const StochModel& model, const MultiIndexBasis& basis,
                                                const CoefficientLayout& layout, std::size_t constraint,
                                                bool allow_truncation, std::size_t* truncated) {
    const auto& c = model.constraints().at(constraint);
    if (c.sense != Sense::equal) throw InputError("constraint '" + c.name + "' is not an equality");
    auto rows = project_expression(model, basis, layout, c.terms, allow_truncation, truncated);
    std::vector<ProjectedEquality> out;
    out.reserve(rows.size());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        out.push_back({static_cast<std::uint32_t>(constraint), static_cast<std::uint32_t>(a), std::move(rows[a])});
    }
    return out;
}

InequalityProjection project_inequality(const StochModel& model, const MultiIndexBasis& basis,
                                        const CoefficientLayout& layout, std::size_t constraint, double lambda,
                                        bool allow_truncation, std::size_t* truncated) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("safety factor must be positive");
    const auto& c = model.constraints().at(constraint);
    if (c.sense != Sense::less_equal) throw InputError("constraint '" + c.name + "' is not an inequality");
    auto rows = project_expression(model, basis, layout, c.terms, allow_truncation, truncated);

    const auto source = static_cast<std::uint32_t>(constraint);
    bool any_variable = false;
    double constant_spread = 0.0;
    ProjectedCone cone{source, lambda, std::move(rows[0]), {}, {}};
    for (std::size_t a = 1; a < rows.size(); ++a) {
        if (rows[a].structurally_zero()) continue;
        any_variable = any_variable || rows[a].has_variables();
        constant_spread += rows[a].constant * rows[a].constant;
        cone.modes.push_back(static_cast<std::uint32_t>(a));
        cone.spread.push_back(std::move(rows[a]));
    }

    InequalityProjection out;
    if (!any_variable) {
        // deterministic spread: mean + lambda * ||const|| <= 0 is linear
        AffineRow row = std::move(cone.mean);
        row.constant += lambda * std::sqrt(constant_spread);
        out.linear = ProjectedLinear{source, std::move(row)};
    } else {
        out.cone = std::move(cone);
    }
    return out;
}

AffineRow project_objective(const StochModel& model, const MultiIndexBasis& basis, const CoefficientLayout& layout) {
    auto rows = project_expression(model, basis, layout, model.objective(), false, nullptr, true);
    return std::move(rows[0]);
}

ProjectedProgram project_model(const StochModel& model, std::shared_ptr<const MultiIndexBasis> basis,
                               const ProjectionSettings& settings) {
    if (!model.finalized()) throw ModelError("model must be finalized before projection");
    if (!basis) throw InputError("no basis given");
    check_basis(model, *basis);
    if (!(settings.lambda > 0.0)) throw InputError("safety factor must be positive");

    ProjectedProgram p{basis, CoefficientLayout(model, basis->size()), {}, {}, {}, {}, 0};
    for (std::size_t j = 0; j < model.constraints().size(); ++j) {
        const auto& c = model.constraints()[j];
        if (c.sense == Sense::equal) {
            auto rows = project_equality(model, *basis, p.layout, j, settings.allow_truncation, &p.truncated_terms);
            for (auto& r : rows) p.equalities.push_back(std::move(r));
            continue;
        }
        double lambda = settings.lambda;
        if (c.epsilon) {
            lambda = safety_factor(*c.epsilon, settings.cantelli);
        } else if (settings.epsilon) {
            lambda = safety_factor(*settings.epsilon, settings.cantelli);
        }
        auto proj = project_inequality(model, *basis, p.layout, j, lambda, settings.allow_truncation,
                                       &p.truncated_terms);
        if (proj.cone) p.cones.push_back(std::move(*proj.cone));
        if (proj.linear) p.linear_inequalities.push_back(std::move(*proj.linear));
    }
    p.objective = project_objective(model, *basis, p.layout);
    return p;
}

RecoursePolicy::RecoursePolicy(const StochModel& model, std::shared_ptr<const MultiIndexBasis> basis,
                               std::vector<double> first_stage, std::vector<double> coefficients)
    : first_scalars_(model.first_stage_scalars()),
      second_scalars_(model.second_stage_scalars()),
      scalar_count_(model.scalar_count()),
      basis_(std::move(basis)),
      first_stage_(std::move(first_stage)),
      coefficients_(std::move(coefficients)) {
    if (!basis_) throw InputError("policy needs a basis");
    check_basis(model, *basis_);
    if (first_stage_.size() != first_scalars_.size()) throw InputError("first-stage value count mismatch");
    if (coefficients_.size() != second_scalars_.size() * basis_->size()) {
        throw InputError("coefficient table size mismatch");
    }
    for (const auto& g : model.germs()) {
        transforms_.push_back(g.standardized.transform);
        distributions_.push_back(g.distribution);
    }
}

RecoursePolicy RecoursePolicy::from_solution(const StochModel& model, const ProjectedProgram& program,
                                             std::span<const double> solution) {
    const auto& l = program.layout;
    if (solution.size() != l.size()) throw InputError("solution length does not match the projected program");
    std::vector<double> first(solution.begin(), solution.begin() + static_cast<std::ptrdiff_t>(l.first_stage_count()));
    std::vector<double> coefs(solution.begin() + static_cast<std::ptrdiff_t>(l.first_stage_count()), solution.end());
    return RecoursePolicy(model, program.basis, std::move(first), std::move(coefs));
}

std::span<const double> RecoursePolicy::coefficients_of(std::size_t recourse) const {
    return std::span<const double>(coefficients_).subspan(recourse * basis_->size(), basis_->size());
}

std::vector<double> RecoursePolicy::standardize(std::span<const double> omega) const {
    if (omega.size() != transforms_.size()) {
        throw InputError("realization has " + std::to_string(omega.size()) + " components, expected " +
                         std::to_string(transforms_.size()));
    }
    std::vector<double> y(omega.size());
    for (std::size_t g = 0; g < omega.size(); ++g) y[g] = transforms_[g].invert(omega[g]);
    return y;
}

bool RecoursePolicy::in_support(std::span<const double> omega) const {
    for (std::size_t g = 0; g < omega.size() && g < distributions_.size(); ++g) {
        if (!distributions_[g].in_support(omega[g])) return false;
    }
    return true;
}

std::vector<double> RecoursePolicy::evaluate(std::span<const double> omega) const {
    const auto y = standardize(omega);
    std::vector<double> psi(basis_->size());
    basis_->eval_all(y, psi);
    const std::size_t n = basis_->size();
    std::vector<double> out(second_scalars_.size(), 0.0);
    for (std::size_t r = 0; r < out.size(); ++r) {
        double acc = 0.0;
        for (std::size_t a = 0; a < n; ++a) acc += coefficients_[r * n + a] * psi[a];
        out[r] = acc;
    }
    return out;
}

void RecoursePolicy::evaluate_scalars(std::span<const double> omega, std::span<double> scalars,
                                      std::vector<double>& workspace) const {
    if (scalars.size() != scalar_count_) throw InputError("scalar buffer size mismatch");
    const std::size_t n = basis_->size();
    workspace.resize(n + omega.size());
    std::span<double> psi(workspace.data(), n);
    std::span<double> y(workspace.data() + n, omega.size());
    if (omega.size() != transforms_.size()) throw InputError("realization dimension mismatch");
    for (std::size_t g = 0; g < omega.size(); ++g) y[g] = transforms_[g].invert(omega[g]);
    basis_->eval_all(y, psi);
    for (std::size_t i = 0; i < first_scalars_.size(); ++i) scalars[first_scalars_[i]] = first_stage_[i];
    for (std::size_t r = 0; r < second_scalars_.size(); ++r) {
        const double* c = coefficients_.data() + r * n;
        double acc = 0.0;
        for (std::size_t a = 0; a < n; ++a) acc += c[a] * psi[a];
        scalars[second_scalars_[r]] = acc;
    }
}

} // namespace spectral
