#include "spectral/benchmark.hpp"
#include "spectral/error.hpp"
#include "spectral/pipeline.hpp"
#include "spectral/vpp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace spectral;

TEST(Vpp, MicroArbitrageHandSolution) {
    // buy 1 MWh at 20, store 0.9, sell 0.81 at 100: profit 61
    const auto model = vpp::build_instance(vpp::micro_arbitrage());
    const auto run = solve_pce(model);
    ASSERT_TRUE(run.ok());
    EXPECT_NEAR(run.result.objective, -61.0, 1e-5);
    const auto dam = model.find_variable("dam");
    ASSERT_TRUE(dam.has_value());
    const auto& x = run.policy->first_stage();
    EXPECT_NEAR(x[model.stage_position((*dam)[0].index)], -1.0, 1e-6);
    EXPECT_NEAR(x[model.stage_position((*dam)[1].index)], 0.81, 1e-6);
}

TEST(Vpp, DeskInstanceShape) {
    const auto config = vpp::desk_instance();
    EXPECT_EQ(config.horizon, 24u);
    EXPECT_EQ(config.reserve_blocks(), 6u);
    EXPECT_EQ(config.uncertainty.size(), 8u);
    const auto model = vpp::build_instance(config);
    const auto s = model.summary();
    EXPECT_EQ(s.germs, 8u);
    EXPECT_EQ(s.first_stage, 24u + 2u * 6u);
    EXPECT_GT(s.inequalities, 0u);
    EXPECT_EQ(make_basis(model, 1)->size(), 9u);
}

TEST(Vpp, ConfigJsonRoundTrip) {
    const auto config = vpp::desk_instance();
    const std::string text = vpp::to_json(config);
    EXPECT_EQ(vpp::to_json(vpp::parse_config(text)), text);
}

TEST(Vpp, BundledDataFileMatchesDeskInstance) {
    std::ifstream in(SPECTRAL_DATA_DIR "/desk_vpp.json");
    ASSERT_TRUE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(vpp::to_json(vpp::parse_config(buf.str())), vpp::to_json(vpp::desk_instance()));
}

TEST(Vpp, ZeroUncertaintyCollapsesToDeterministicLp) {
    auto config = vpp::desk_instance();
    config.uncertainty_scale = 0.0;
    const auto model = vpp::build_instance(config);
    EXPECT_EQ(model.summary().germs, 0u);
    const auto pce = solve_pce(model);
    ASSERT_TRUE(pce.ok());
    const auto sa = solve_sa(model, 5, 1);
    ASSERT_TRUE(sa.ok()) << sa.message;
    EXPECT_NEAR(pce.result.objective, sa.objective, 1e-6 * std::max(1.0, std::abs(sa.objective)));
}

TEST(Vpp, RejectsInvalidConfigs) {
    auto c = vpp::desk_instance();
    c.prices.day_ahead.pop_back();
    EXPECT_THROW(c.validate(), InputError);
    c = vpp::desk_instance();
    c.uncertainty_scale = -1.0;
    EXPECT_THROW(c.validate(), InputError);
    EXPECT_THROW(vpp::parse_config("{not json"), InputError);
    EXPECT_THROW(vpp::parse_germ_role("wind"), InputError);
}
