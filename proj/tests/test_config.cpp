#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "scatter_bayes/config.hpp"

using namespace scatter_bayes;

TEST(Config, EmptyObjectGivesDefaults) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.shape, "kite");
  EXPECT_EQ(c.prior.m, 27);
  EXPECT_EQ(c.prior.s, 2.2);
  EXPECT_EQ(c.prior.lambda, 0.2);
  EXPECT_EQ(c.prior.tv_alpha, 0.1);
  EXPECT_EQ(c.chain.n_total, 11000);
  EXPECT_EQ(c.chain.burn_in, 1000);
  EXPECT_EQ(c.chain.init, ChainInit::Zero);
  EXPECT_EQ(c.forward.n_quad_data, 128);
  EXPECT_EQ(c.forward.n_quad_inversion, 64);
  EXPECT_EQ(c.apertures.obs_kind, ObservationKind::Gamma1);
  EXPECT_EQ(c.apertures.inc_kind, IncidentKind::Gamma2);
}

TEST(Config, ParsesAllSections) {
  const auto c = parse_config(R"({
    "shape": "pear", "kappa": 1.5, "true_center": [0.1, 0], "assumed_center": [0, -0.2],
    "chains": 3, "output_dir": "runs/x",
    "apertures": {"observation": "gamma3_o", "incident": "custom", "incident_angles": [0.5]},
    "noise": {"eta1": 0.02, "eta2": 0.03, "seed": 9},
    "prior": {"s": 2.0, "lambda": 0.3, "tv_alpha": 0.2, "m": 11, "divide_by_eigenvalue": false},
    "chain": {"beta": 0.05, "n_total": 500, "burn_in": 100, "seed": 4, "thin": 2,
              "init": "optimized", "adapt_beta": true},
    "forward": {"n_quad_data": 96, "n_quad_inversion": 48, "r_max": 5}
  })");
  EXPECT_EQ(c.shape, "pear");
  EXPECT_EQ(c.kappa, 1.5);
  EXPECT_EQ(c.true_center, Point(0.1, 0.0));
  EXPECT_EQ(c.assumed_center, Point(0.0, -0.2));
  EXPECT_EQ(c.chains, 3);
  EXPECT_EQ(c.output_dir, "runs/x");
  EXPECT_EQ(c.apertures.obs_kind, ObservationKind::Gamma3);
  EXPECT_EQ(c.apertures.inc_custom, std::vector<double>{0.5});
  EXPECT_EQ(c.noise.seed, 9u);
  EXPECT_FALSE(c.prior.divide_by_eigenvalue);
  EXPECT_EQ(c.chain.init, ChainInit::Optimized);
  EXPECT_TRUE(c.chain.adapt_beta);
  EXPECT_EQ(c.forward.n_quad_inversion, 48);
  EXPECT_EQ(c.inversion_scattering().kappa, 1.5);
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_THROW(parse_config(R"({"shap": "kite"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"prior": {"sigma": 1}})"), ConfigError);
  try {
    parse_config(R"({"chain": {"betta": 0.1}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("chain.betta"), std::string::npos);
  }
}

TEST(Config, TypeAndRangeErrors) {
  EXPECT_THROW(parse_config(R"({"kappa": "one"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"shape": "teapot"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"prior": {"tv_alpha": 0.7}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"chain": {"beta": 1.5}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"chain": {"init": "random"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"true_center": [1, 2, 3]})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"forward": {"n_quad_inversion": 63}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config("[]"), ConfigError);
}

TEST(Config, DumpRoundTrips) {
  auto c = parse_config(R"({"shape": "star", "chain": {"init": "prior_draw", "seed": 123}})");
  const auto again = parse_config(dump_config(c));
  EXPECT_EQ(dump_config(again), dump_config(c));
  EXPECT_EQ(again.chain.init, ChainInit::PriorDraw);
}

TEST(Config, ShippedExperimentsParse) {
  const std::filesystem::path dir = std::filesystem::path(SCATTER_BAYES_SOURCE_DIR) / "experiments";
  int count = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GT(count, 0);
}
