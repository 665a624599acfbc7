#include "spectral/error.hpp"
#include "spectral/galerkin.hpp"
#include "spectral/model.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>

#include <cmath>

using namespace spectral;

namespace {

double coefficient_of(const AffineRow& row, std::uint32_t index) {
    for (std::size_t i = 0; i < row.index.size(); ++i)
        if (row.index[i] == index) return row.value[i];
    return 0.0;
}

// x first stage, y second stage, g ~ N(2, 3): y = x + g, y <= 10, cost x + 2 g y
StochModel toy() {
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    auto y = m.add_variable("y", Stage::second)[0];
    auto g = m.add_germ("g", Distribution::normal(2.0, 3.0));
    m.add_constraint(Expression(y) - x - g, Sense::equal, std::nullopt, "balance");
    m.add_constraint(Expression(y) - 10.0, Sense::less_equal, std::nullopt, "cap");
    m.set_objective(Expression(x) + 2.0 * (Expression(g) * y));
    m.finalize();
    return m;
}

} // namespace

TEST(SafetyFactor, GaussianAndCantelli) {
    boost::math::normal_distribution<> n;
    EXPECT_NEAR(safety_factor(0.05), boost::math::quantile(n, 0.95), 1e-12);
    EXPECT_NEAR(safety_factor(0.05, true), std::sqrt(19.0), 1e-12);
    EXPECT_THROW(safety_factor(0.0), InputError);
    EXPECT_THROW(safety_factor(1.0), InputError);
}

TEST(Layout, FirstStageThenCoefficientsBasisFastest) {
    const auto m = toy();
    const CoefficientLayout l(m, 3);
    EXPECT_EQ(l.size(), 4u);
    EXPECT_EQ(l.first_stage(0), 0u);
    EXPECT_EQ(l.coefficient(0, 2), 3u);
}

TEST(Projection, EqualityHoldsModeByMode) {
    const auto m = toy();
    const auto basis = make_basis(m, 1);
    const CoefficientLayout l(m, basis->size());
    const auto rows = project_equality(m, *basis, l, 0);
    ASSERT_EQ(rows.size(), 2u);
    // mode 0: y_0 - x - 2 = 0
    EXPECT_DOUBLE_EQ(coefficient_of(rows[0].row, l.coefficient(0, 0)), 1.0);
    EXPECT_DOUBLE_EQ(coefficient_of(rows[0].row, l.first_stage(0)), -1.0);
    EXPECT_NEAR(rows[0].row.constant, -2.0, 1e-14);
    // mode 1: y_1 - 3 = 0
    EXPECT_DOUBLE_EQ(coefficient_of(rows[1].row, l.coefficient(0, 1)), 1.0);
    EXPECT_DOUBLE_EQ(coefficient_of(rows[1].row, l.first_stage(0)), 0.0);
    EXPECT_NEAR(rows[1].row.constant, -3.0, 1e-14);
}

TEST(Projection, InequalityBecomesMeanPlusScaledSpread) {
    const auto m = toy();
    const auto basis = make_basis(m, 2);
    const CoefficientLayout l(m, basis->size());
    const auto p = project_inequality(m, *basis, l, 1, 1.645);
    ASSERT_TRUE(p.cone.has_value());
    EXPECT_FALSE(p.linear.has_value());
    EXPECT_DOUBLE_EQ(p.cone->lambda, 1.645);
    EXPECT_DOUBLE_EQ(coefficient_of(p.cone->mean, l.coefficient(0, 0)), 1.0);
    EXPECT_DOUBLE_EQ(p.cone->mean.constant, -10.0);
    ASSERT_EQ(p.cone->spread.size(), 2u);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_EQ(p.cone->modes[k], k + 1);
        EXPECT_DOUBLE_EQ(coefficient_of(p.cone->spread[k], l.coefficient(0, k + 1)), 1.0);
    }
}

TEST(Projection, DeterministicInequalityIsLinear) {
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    auto g = m.add_germ("g", Distribution::normal(0.0, 1.0));
    m.add_constraint(Expression(x) - 3.0, Sense::less_equal);
    m.set_objective(Expression(x) + Expression(g));
    m.finalize();
    const auto basis = make_basis(m, 1);
    const CoefficientLayout l(m, basis->size());
    const auto p = project_inequality(m, *basis, l, 0, 1.645);
    EXPECT_FALSE(p.cone.has_value());
    ASSERT_TRUE(p.linear.has_value());
    EXPECT_DOUBLE_EQ(p.linear->row.constant, -3.0);
}

TEST(Projection, ObjectiveIsExpectedCost) {
    // E[x + 2 g y] with y = sum y_k Psi_k and g = 2 + 3 Psi_1: x + 4 y_0 + 6 y_1
    const auto m = toy();
    const auto basis = make_basis(m, 2);
    const CoefficientLayout l(m, basis->size());
    const auto obj = project_objective(m, *basis, l);
    EXPECT_DOUBLE_EQ(coefficient_of(obj, l.first_stage(0)), 1.0);
    EXPECT_NEAR(coefficient_of(obj, l.coefficient(0, 0)), 4.0, 1e-13);
    EXPECT_NEAR(coefficient_of(obj, l.coefficient(0, 1)), 6.0, 1e-13);
    EXPECT_NEAR(coefficient_of(obj, l.coefficient(0, 2)), 0.0, 1e-13);
}

TEST(Projection, GermTimesRecourseNeedsHeadroom) {
    // g*y in a constraint: at the top degree the product leaves the basis
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    auto y = m.add_variable("y", Stage::second)[0];
    auto g = m.add_germ("g", Distribution::normal(0.0, 1.0));
    m.add_constraint(Expression(y) - x - g, Sense::equal);
    m.add_constraint(Expression(g) * y - 5.0, Sense::less_equal);
    m.set_objective(Expression(x) + y);
    m.finalize();
    const auto basis = make_basis(m, 1);
    EXPECT_THROW(project_model(m, basis), ModelError);
    ProjectionSettings s;
    s.allow_truncation = true;
    const auto program = project_model(m, basis, s);
    EXPECT_GT(program.truncated_terms, 0u);
}

TEST(Projection, ReportCountsEveryRow) {
    const auto m = toy();
    const auto program = project_model(m, make_basis(m, 1));
    const auto r = program.report();
    EXPECT_EQ(r.basis_size, 2u);
    EXPECT_EQ(r.variables, 3u);
    EXPECT_EQ(r.equalities, 2u);
    EXPECT_EQ(r.cones, 1u);
    EXPECT_EQ(r.cone_rows, 2u);
}

TEST(Projection, RequiresFinalizedModel) {
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    m.set_objective(Expression(x));
    EXPECT_THROW(project_model(m, make_basis(toy(), 1)), ModelError);
}

TEST(Policy, EvaluatesExpansionInNaturalUnits) {
    const auto m = toy();
    const auto basis = make_basis(m, 1);
    // y(g) = x + g with x = 1: y_0 = 3, y_1 = 3
    RecoursePolicy p(m, basis, {1.0}, {3.0, 3.0});
    for (double g : {-4.0, 0.0, 2.0, 7.5}) {
        const std::vector<double> omega{g};
        EXPECT_NEAR(p.evaluate(omega)[0], 1.0 + g, 1e-13);
    }
    EXPECT_THROW(p.evaluate(std::vector<double>{1.0, 2.0}), InputError);
    EXPECT_THROW(RecoursePolicy(m, basis, {1.0}, {3.0}), InputError);
}

TEST(Basis, FollowsGermDistributions) {
    StochModel m;
    auto y = m.add_variable("y", Stage::second)[0];
    auto a = m.add_germ("a", Distribution::uniform(0.0, 1.0));
    auto b = m.add_germ("b", Distribution::beta(2.0, 3.0));
    m.add_constraint(Expression(y) - a - b, Sense::equal);
    m.set_objective(Expression(y));
    m.finalize();
    const auto basis = make_basis(m, 2);
    EXPECT_EQ(basis->size(), 6u);
    EXPECT_EQ(basis->families()[0].kind(), FamilyKind::legendre);
    EXPECT_EQ(basis->families()[1].kind(), FamilyKind::jacobi);
}
