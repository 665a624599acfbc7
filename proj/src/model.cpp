#include "spectral/model.hpp"

#include "spectral/error.hpp"
#include "spectral/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace spectral {

std::string_view to_string(Stage stage) {
    return stage == Stage::first ? "first" : "second";
}

std::string_view to_string(Sense sense) {
    return sense == Sense::equal ? "eq" : "le";
}

ScalarVar VarBlock::operator[](std::size_t i) const {
    if (i >= size) {
        throw InputError("index " + std::to_string(i) + " out of range for a block of " + std::to_string(size));
    }
    return ScalarVar{offset + static_cast<std::uint32_t>(i)};
}

Expression::Expression(double constant) {
    monomials_.push_back({constant, {}, {}});
}

Expression::Expression(ScalarVar var) {
    monomials_.push_back({1.0, {}, {var.index}});
}

Expression::Expression(GermRef germ) {
    monomials_.push_back({1.0, {germ.index}, {}});
}

Expression& Expression::operator+=(const Expression& other) {
    monomials_.insert(monomials_.end(), other.monomials_.begin(), other.monomials_.end());
    return *this;
}

Expression& Expression::operator-=(const Expression& other) {
    for (auto m : other.monomials_) {
        m.coef = -m.coef;
        monomials_.push_back(std::move(m));
    }
    return *this;
}

Expression& Expression::operator*=(double factor) {
    for (auto& m : monomials_) m.coef *= factor;
    return *this;
}

Expression operator*(const Expression& a, const Expression& b) {
    Expression out;
    out.monomials_.reserve(a.monomials_.size() * b.monomials_.size());
    for (const auto& ma : a.monomials_) {
        for (const auto& mb : b.monomials_) {
            Monomial m{ma.coef * mb.coef, ma.germs, ma.vars};
            m.germs.insert(m.germs.end(), mb.germs.begin(), mb.germs.end());
            m.vars.insert(m.vars.end(), mb.vars.begin(), mb.vars.end());
            out.monomials_.push_back(std::move(m));
        }
    }
    return out;
}

namespace {

bool valid_identifier(const std::string& name) {
    if (name.empty()) return false;
    auto head = static_cast<unsigned char>(name.front());
    if (!(std::isalpha(head) || head == '_')) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_' || u == '.';
    });
}

// constraint names additionally allow indices such as "balance[3,1]"
bool valid_constraint_name(const std::string& name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_' || u == '.' || u == '[' || u == ']' || u == ',' || u == '-';
    });
}

bool term_less(const Term& a, const Term& b) {
    if (a.var != b.var) return a.var < b.var;
    return a.germ < b.germ;
}

} // namespace

void StochModel::require_open(const char* what) const {
    if (finalized_) throw ModelError(std::string("cannot ") + what + ": model is finalized");
}

void StochModel::check_name(const std::string& name) const {
    if (!valid_identifier(name)) throw ModelError("invalid name '" + name + "'");
    if (find_variable(name) || find_germ(name)) throw ModelError("duplicate name '" + name + "'");
}

VarBlock StochModel::add_variable(const std::string& name, Stage stage, std::vector<std::size_t> shape) {
    require_open("add variable");
    check_name(name);
    std::size_t size = 1;
    for (auto d : shape) {
        if (d == 0) throw ModelError("variable '" + name + "' has an empty dimension");
        size *= d;
    }
    const auto id = static_cast<std::uint32_t>(variables_.size());
    const auto offset = static_cast<std::uint32_t>(scalar_stage_.size());
    variables_.push_back({name, stage, std::move(shape), offset, static_cast<std::uint32_t>(size)});
    for (std::size_t i = 0; i < size; ++i) {
        const auto scalar = static_cast<std::uint32_t>(scalar_stage_.size());
        scalar_stage_.push_back(stage);
        scalar_block_.push_back(id);
        auto& list = stage == Stage::first ? first_stage_ : second_stage_;
        stage_position_.push_back(list.size());
        list.push_back(scalar);
    }
    return VarBlock{id, offset, static_cast<std::uint32_t>(size)};
}

GermRef StochModel::add_germ(const std::string& name, const Distribution& distribution, bool declared_unused) {
    require_open("add germ");
    check_name(name);
    germs_.push_back({name, distribution, standardize(distribution), declared_unused});
    return GermRef{static_cast<std::uint32_t>(germs_.size() - 1)};
}

void StochModel::declare_correlation(GermRef a, GermRef b, double rho) {
    require_open("declare correlation");
    if (a.index >= germs_.size() || b.index >= germs_.size()) throw ModelError("unknown germ in correlation");
    if (rho != 0.0 && a.index != b.index) {
        throw ModelError("germs '" + germs_[a.index].name + "' and '" + germs_[b.index].name +
                         "' are declared correlated; germs must be independent, so transform dependent inputs "
                         "(e.g. with a copula) into independent germs before building the model");
    }
}

std::string StochModel::describe(const Term& term) const {
    std::string out = format_double(term.coef);
    if (term.germ >= 0) out += "*" + germs_.at(static_cast<std::size_t>(term.germ)).name;
    if (term.var >= 0) out += "*" + scalar_name(static_cast<std::size_t>(term.var));
    return out;
}

std::vector<Term> StochModel::compile(const Expression& expr, const std::string& context) const {
    std::map<std::pair<std::int32_t, std::int32_t>, double> merged;
    for (const auto& m : expr.monomials()) {
        auto render = [&] {
            std::string s = format_double(m.coef);
            for (auto g : m.germs) s += "*" + (g < germs_.size() ? germs_[g].name : "?");
            for (auto v : m.vars) s += "*" + (v < scalar_count() ? scalar_name(v) : "?");
            return s;
        };
        if (!std::isfinite(m.coef)) throw ModelError(context + ": non-finite coefficient in term " + render());
        if (m.germs.size() > 1) throw ModelError(context + ": term " + render() + " is nonlinear in the germs");
        if (m.vars.size() > 1) throw ModelError(context + ": term " + render() + " is nonlinear in the variables");
        for (auto g : m.germs) {
            if (g >= germs_.size()) throw ModelError(context + ": unknown germ in term " + render());
        }
        for (auto v : m.vars) {
            if (v >= scalar_count()) throw ModelError(context + ": unknown variable in term " + render());
        }
        const std::int32_t g = m.germs.empty() ? -1 : static_cast<std::int32_t>(m.germs[0]);
        const std::int32_t v = m.vars.empty() ? -1 : static_cast<std::int32_t>(m.vars[0]);
        merged[{v, g}] += m.coef;
    }
    std::vector<Term> out;
    out.reserve(merged.size());
    for (const auto& [key, coef] : merged) {
        if (coef != 0.0) out.push_back({coef, key.second, key.first});
    }
    std::sort(out.begin(), out.end(), term_less);
    return out;
}

std::size_t StochModel::add_constraint(const Expression& expr, Sense sense, std::optional<double> epsilon,
                                       std::string name) {
    require_open("add constraint");
    if (name.empty()) name = "c" + std::to_string(constraints_.size());
    if (!valid_constraint_name(name)) throw ModelError("invalid constraint name '" + name + "'");
    if (sense == Sense::equal && epsilon) {
        throw ModelError("constraint '" + name + "': equality constraints carry no violation probability");
    }
    if (epsilon && !(*epsilon > 0.0 && *epsilon < 1.0)) {
        throw ModelError("constraint '" + name + "': violation probability must lie in (0, 1)");
    }
    auto terms = compile(expr, "constraint '" + name + "'");
    constraints_.push_back({std::move(name), std::move(terms), sense, epsilon});
    return constraints_.size() - 1;
}

void StochModel::set_objective(const Expression& expr) {
    require_open("set objective");
    objective_ = compile(expr, "objective");
    has_objective_ = true;
}

ModelSummary StochModel::summary() const {
    ModelSummary s;
    s.first_stage = first_stage_.size();
    s.second_stage = second_stage_.size();
    s.germs = germs_.size();
    for (const auto& c : constraints_) {
        (c.sense == Sense::equal ? s.equalities : s.inequalities) += 1;
    }
    return s;
}

ModelSummary StochModel::finalize() {
    if (finalized_) return summary();
    if (!has_objective_) throw ModelError("model has no objective");

    std::vector<bool> used(germs_.size(), false);
    auto mark = [&](const std::vector<Term>& terms) {
        for (const auto& t : terms) {
            if (t.germ >= 0) used[static_cast<std::size_t>(t.germ)] = true;
        }
    };
    mark(objective_);
    for (const auto& c : constraints_) {
        mark(c.terms);
        if (c.sense != Sense::equal) continue;
        bool has_recourse = false;
        const Term* offending = nullptr;
        for (const auto& t : c.terms) {
            if (t.var >= 0 && stage_of(static_cast<std::size_t>(t.var)) == Stage::second) has_recourse = true;
            if (t.germ >= 0 && !offending) offending = &t;
        }
        if (!has_recourse && offending) {
            throw ModelError("equality '" + c.name + "' has the uncertain term " + describe(*offending) +
                             " but no second-stage variable, so it cannot hold for every realization");
        }
    }
    for (std::size_t g = 0; g < germs_.size(); ++g) {
        if (!used[g] && !germs_[g].declared_unused) {
            throw ModelError("germ '" + germs_[g].name + "' is never used; declare it unused explicitly");
        }
    }
    finalized_ = true;
    return summary();
}

std::string StochModel::scalar_name(std::size_t scalar) const {
    const auto& block = block_of(scalar);
    if (block.shape.empty()) return block.name;
    std::size_t flat = scalar - block.offset;
    std::vector<std::size_t> idx(block.shape.size());
    for (std::size_t d = block.shape.size(); d-- > 0;) {
        idx[d] = flat % block.shape[d];
        flat /= block.shape[d];
    }
    std::string out = block.name + "[";
    for (std::size_t d = 0; d < idx.size(); ++d) {
        if (d) out += ",";
        out += std::to_string(idx[d]);
    }
    return out + "]";
}

const Variable& StochModel::block_of(std::size_t scalar) const {
    return variables_.at(scalar_block_.at(scalar));
}

std::optional<VarBlock> StochModel::find_variable(const std::string& name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i].name == name) {
            return VarBlock{static_cast<std::uint32_t>(i), variables_[i].offset, variables_[i].size};
        }
    }
    return std::nullopt;
}

std::optional<GermRef> StochModel::find_germ(const std::string& name) const {
    for (std::size_t i = 0; i < germs_.size(); ++i) {
        if (germs_[i].name == name) return GermRef{static_cast<std::uint32_t>(i)};
    }
    return std::nullopt;
}

double evaluate_terms(std::span<const Term> terms, std::span<const double> scalars, std::span<const double> omega) {
    double acc = 0.0;
    for (const auto& t : terms) {
        double v = t.coef;
        if (t.germ >= 0) v *= omega[static_cast<std::size_t>(t.germ)];
        if (t.var >= 0) v *= scalars[static_cast<std::size_t>(t.var)];
        acc += v;
    }
    return acc;
}

std::vector<double> germ_means(const StochModel& model) {
    std::vector<double> out;
    out.reserve(model.germs().size());
    for (const auto& g : model.germs()) out.push_back(g.distribution.mean());
    return out;
}

StochModel freeze_germs(const StochModel& model) {
    const auto means = germ_means(model);
    StochModel out;
    for (const auto& v : model.variables()) out.add_variable(v.name, v.stage, v.shape);
    auto rebuild = [&](const std::vector<Term>& terms) {
        Expression e;
        for (const auto& t : terms) {
            double coef = t.coef;
            if (t.germ >= 0) coef *= means[static_cast<std::size_t>(t.germ)];
            e += t.var >= 0 ? Expression(coef) * ScalarVar{static_cast<std::uint32_t>(t.var)} : Expression(coef);
        }
        return e;
    };
    for (const auto& c : model.constraints()) out.add_constraint(rebuild(c.terms), c.sense, c.epsilon, c.name);
    if (model.has_objective()) out.set_objective(rebuild(model.objective()));
    if (model.finalized()) out.finalize();
    return out;
}

} // namespace spectral
