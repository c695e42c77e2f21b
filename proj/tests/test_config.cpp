#include "fhn/config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace fhn;
using nlohmann::json;

TEST(Config, DefaultsRoundTrip)
{
    RunConfig d;
    RunConfig back = RunConfig::from_json(d.to_json());
    EXPECT_EQ(back.to_json(), d.to_json());
    EXPECT_EQ(back.hash(), d.hash());
    EXPECT_EQ(d.hash().size(), 16u);
    EXPECT_TRUE(std::isinf(back.dynamics.p.back()));
}

TEST(Config, EmptyDocumentGivesDefaults)
{
    EXPECT_EQ(RunConfig::from_json(json::object()).hash(), RunConfig{}.hash());
}

TEST(Config, PartialDocumentMergesOverDefaults)
{
    auto c = RunConfig::from_json(json{{"model", {{"rho", 0.012}}}, {"dynamics", {{"p", {2, "inf"}}}}});
    EXPECT_DOUBLE_EQ(c.model.rho, 0.012);
    EXPECT_DOUBLE_EQ(c.model.r0, RunConfig{}.model.r0);
    ASSERT_EQ(c.dynamics.p.size(), 2u);
    EXPECT_TRUE(std::isinf(c.dynamics.p[1]));
    EXPECT_NE(c.hash(), RunConfig{}.hash());
}

TEST(Config, UnknownKeysAndBadTypesRejected)
{
    EXPECT_THROW(RunConfig::from_json(json{{"modle", json::object()}}), PreconditionError);
    EXPECT_THROW(RunConfig::from_json(json{{"model", {{"r1", 0.1}}}}), PreconditionError);
    EXPECT_THROW(RunConfig::from_json(json{{"model", {{"rho", "small"}}}}), PreconditionError);
    EXPECT_THROW(RunConfig::from_json(json{{"grid", 3}}), PreconditionError);
    EXPECT_THROW(RunConfig::from_json(json{{"dynamics", {{"p", {3}}}}}), PreconditionError);
}

TEST(Config, HypothesisRangesEnforced)
{
    EXPECT_THROW(RunConfig::from_json(json{{"model", {{"r0", 1.2}}}}), PreconditionError);
    EXPECT_THROW(RunConfig::from_json(json{{"model", {{"rho", 0.0}}}}), PreconditionError);
    // gamma < 4 / (1 - r0)^2 = 4.938 at r0 = 0.1
    EXPECT_THROW(RunConfig::from_json(json{{"model", {{"gamma", 5.0}}}}), PreconditionError);
    EXPECT_NO_THROW(RunConfig::from_json(json{{"model", {{"gamma", 4.9}}}}));
}

TEST(Config, CommensurabilityEnforced)
{
    EXPECT_THROW(RunConfig::from_json(json{{"continuation", {{"h_list", {0.5, 0.25, 0.13}}}}}), PreconditionError);
    EXPECT_THROW(RunConfig::from_json(json{{"grid", {{"d", 0.02}}}}), PreconditionError);
    EXPECT_THROW(RunConfig::from_json(json{{"spectrum", {{"h", 0.35}}}}), PreconditionError);
    EXPECT_THROW(RunConfig::from_json(json{{"continuation", {{"h_list", {0.25, 0.5}}}}}), PreconditionError);
    EXPECT_NO_THROW(RunConfig::from_json(json{{"continuation", {{"h_list", {0.5, 0.1}}}}}));
}

TEST(Config, Overrides)
{
    json doc = json::object();
    apply_override(doc, "dynamics.T=50");
    apply_override(doc, "kernel.type=quartic");
    apply_override(doc, "green.t_list=[0.5,1]");
    auto c = RunConfig::from_json(doc);
    EXPECT_DOUBLE_EQ(c.dynamics.T, 50.0);
    EXPECT_EQ(c.kernel_type, "quartic");
    EXPECT_EQ(c.green.t_list.size(), 2u);
    EXPECT_THROW(apply_override(doc, "novalue"), PreconditionError);
    EXPECT_THROW(apply_override(doc, "a..b=1"), PreconditionError);
}

TEST(Config, ChiNullMeansAutomatic)
{
    auto c = RunConfig::from_json(json{{"green", {{"chi", 3.5}}}});
    ASSERT_TRUE(c.green.chi.has_value());
    EXPECT_DOUBLE_EQ(*c.green.chi, 3.5);
    auto d = RunConfig::from_json(json{{"green", {{"chi", nullptr}}}});
    EXPECT_FALSE(d.green.chi.has_value());
}

TEST(Config, LoadFromFile)
{
    const std::string path = ::testing::TempDir() + "cfg_test.json";
    {
        std::ofstream f(path);
        f << R"({"kernel": {"K": 12}})";
    }
    EXPECT_EQ(RunConfig::load(path).K, 12);
    {
        std::ofstream f(path);
        f << R"({"kernel": {"K": 12})";
    }
    EXPECT_THROW(RunConfig::load(path), PreconditionError);
    EXPECT_THROW(RunConfig::load(path + ".missing"), PreconditionError);
    std::remove(path.c_str());
}

TEST(Config, KernelFactory)
{
    RunConfig c;
    EXPECT_EQ(c.kernel().K(), 20);
    c.kernel_type = "custom";
    c.coeffs = {1.0, 0.5};
    EXPECT_NEAR(c.kernel().alpha(1), 1.0 / 3.0, 1e-15);
    c.kernel_type = "cauchy";
    EXPECT_THROW(c.kernel(), PreconditionError);
}
