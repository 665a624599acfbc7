#include "spectral/error.hpp"
#include "spectral/model.hpp"
#include "spectral/model_io.hpp"
#include "spectral/text.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace spectral;

namespace {

StochModel storage_model() {
    StochModel m;
    auto bid = m.add_variable("bid", Stage::first, {3});
    auto soc = m.add_variable("soc", Stage::second, {3});
    auto xi = m.add_germ("xi_L", Distribution::normal(0.0, 0.1075));
    auto u = m.add_germ("xi_S", Distribution::uniform(-1.0, 1.0));
    m.add_germ("xi_unused", Distribution::gamma(2.0, 0.5), true);
    for (std::size_t t = 0; t < 3; ++t) {
        m.add_constraint(Expression(soc[t]) - bid[t] + 0.5 * Expression(xi), Sense::equal, std::nullopt,
                         "balance[" + std::to_string(t) + "]");
        m.add_constraint(Expression(soc[t]) - 4.0 + Expression(u) * 0.1, Sense::less_equal, 0.05,
                         "cap[" + std::to_string(t) + "]");
    }
    Expression cost;
    for (std::size_t t = 0; t < 3; ++t) cost += 30.0 * Expression(bid[t]) + 4.28 * (Expression(xi) * bid[t]);
    m.set_objective(cost);
    m.finalize();
    return m;
}

} // namespace

TEST(Model, SummaryCountsScalarsAndRows) {
    const auto m = storage_model();
    const auto s = m.summary();
    EXPECT_EQ(s.first_stage, 3u);
    EXPECT_EQ(s.second_stage, 3u);
    EXPECT_EQ(s.germs, 3u);
    EXPECT_EQ(s.equalities, 3u);
    EXPECT_EQ(s.inequalities, 3u);
    EXPECT_EQ(m.scalar_name(4), "soc[1]");
    EXPECT_EQ(m.stage_position(4), 1u);
}

TEST(Model, ExpressionsCombineLikeAlgebra) {
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    auto g = m.add_germ("g", Distribution::normal(1.0, 2.0));
    const Expression e = (Expression(x) + 2.0) * (Expression(g) - 1.0);
    // x*g - x + 2g - 2
    EXPECT_EQ(e.monomials().size(), 4u);
    m.set_objective(e);
    m.finalize();
    const std::vector<double> scalars{3.0};
    const std::vector<double> omega{5.0};
    EXPECT_DOUBLE_EQ(evaluate_terms(m.objective(), scalars, omega), (3.0 + 2.0) * (5.0 - 1.0));
}

TEST(Model, RejectsProductsOfGermsOrVariables) {
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    auto y = m.add_variable("y", Stage::second)[0];
    auto g = m.add_germ("g", Distribution::normal(0.0, 1.0));
    auto h = m.add_germ("h", Distribution::normal(0.0, 1.0));
    EXPECT_THROW(m.add_constraint(Expression(g) * Expression(h) + y, Sense::less_equal), ModelError);
    EXPECT_THROW(m.add_constraint(Expression(x) * Expression(y), Sense::less_equal), ModelError);
    EXPECT_THROW(m.set_objective(Expression(x) * Expression(x)), ModelError);
}

TEST(Model, RejectsUncertainEqualityWithoutRecourse) {
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    auto g = m.add_germ("g", Distribution::normal(0.0, 1.0));
    m.add_constraint(Expression(x) - g, Sense::equal, std::nullopt, "fixed");
    m.set_objective(Expression(x));
    EXPECT_THROW(m.finalize(), ModelError);
}

TEST(Model, RejectsSilentlyUnusedGerms) {
    StochModel m;
    auto x = m.add_variable("x", Stage::first)[0];
    m.add_germ("g", Distribution::normal(0.0, 1.0));
    m.set_objective(Expression(x));
    EXPECT_THROW(m.finalize(), ModelError);
}

TEST(Model, RejectsCorrelationAndInvalidNames) {
    StochModel m;
    auto a = m.add_germ("a", Distribution::normal(0.0, 1.0));
    auto b = m.add_germ("b", Distribution::normal(0.0, 1.0));
    EXPECT_NO_THROW(m.declare_correlation(a, b, 0.0));
    EXPECT_THROW(m.declare_correlation(a, b, 0.3), ModelError);
    EXPECT_THROW(m.add_variable("a", Stage::first), ModelError);
    EXPECT_THROW(m.add_variable("bad name", Stage::first), ModelError);
    EXPECT_THROW(m.add_variable("z", Stage::first, {0}), ModelError);
}

TEST(Model, RejectsChanceTargetsOnEqualitiesAndOutOfRange) {
    StochModel m;
    auto y = m.add_variable("y", Stage::second)[0];
    EXPECT_THROW(m.add_constraint(Expression(y), Sense::equal, 0.05), ModelError);
    EXPECT_THROW(m.add_constraint(Expression(y), Sense::less_equal, 1.5), ModelError);
    EXPECT_THROW(m.add_constraint(Expression(y), Sense::less_equal, 0.0), ModelError);
}

TEST(Model, RejectsEditsAfterFinalize) {
    auto m = storage_model();
    EXPECT_THROW(m.add_variable("late", Stage::first), ModelError);
    EXPECT_THROW(m.add_germ("late", Distribution::normal(0.0, 1.0)), ModelError);
}

TEST(Model, FreezeReplacesGermsByMeans) {
    const auto m = storage_model();
    const auto frozen = freeze_germs(m);
    EXPECT_TRUE(frozen.germs().empty());
    EXPECT_EQ(frozen.summary().inequalities, 3u);
    const std::vector<double> scalars{1.0, 2.0, 3.0, 0.5, 0.5, 0.5};
    const std::vector<double> none;
    const std::vector<double> means = germ_means(m);
    for (std::size_t c = 0; c < m.constraints().size(); ++c) {
        EXPECT_NEAR(evaluate_terms(frozen.constraints()[c].terms, scalars, none),
                    evaluate_terms(m.constraints()[c].terms, scalars, means), 1e-14);
    }
}

TEST(ModelText, RoundTripIsByteIdentical) {
    const auto m = storage_model();
    const std::string first = write_model(m);
    const auto back = read_model_string(first);
    EXPECT_EQ(write_model(back), first);
    EXPECT_EQ(back.summary().inequalities, m.summary().inequalities);
    EXPECT_EQ(back.germs()[2].declared_unused, true);
    EXPECT_EQ(back.constraints()[1].epsilon, std::optional<double>(0.05));
}

TEST(ModelText, ParsesDocumentedExample) {
    const std::string text =
        "spectral-model 1\n"
        "# comment\n"
        "germ xi_L normal 0 0.1075\n"
        "germ xi_S uniform -1 1 unused\n"
        "var bid first 24\n"
        "var soc second 24\n"
        "eq balance[0] : 1*soc[0] -1*bid[0] 0.5*xi_L\n"
        "le cap[0] eps=0.05 : 1*soc[0] -4\n"
        "objective : 30*bid[0] 4.28*xi_L*bid[0]\n"
        "end\n";
    const auto m = read_model_string(text);
    EXPECT_EQ(m.summary().first_stage, 24u);
    EXPECT_EQ(m.constraints().size(), 2u);
    EXPECT_EQ(m.objective().size(), 2u);
}

TEST(ModelText, ReportsMalformedInput) {
    EXPECT_THROW(read_model_string("spectral-model 2\nend\n"), InputError);
    EXPECT_THROW(read_model_string("spectral-model 1\ngerm g cauchy 0 1\nend\n"), InputError);
    EXPECT_THROW(read_model_string("spectral-model 1\nvar x first\neq e : 1*y\nobjective : 1*x\nend\n"), InputError);
    EXPECT_THROW(read_model_string("spectral-model 1\nvar x first\nobjective : 1*x\n"), InputError);
    EXPECT_THROW(read_model_string("spectral-model 1\nvar x first\nobjective : abc*x\nend\n"), InputError);
}

TEST(Text, ShortestRoundTripFormatting) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e22, 123456789.125, 0.0}) {
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_THROW(parse_double("1.0x"), InputError);
    EXPECT_THROW(parse_integer("2.5"), InputError);
}
