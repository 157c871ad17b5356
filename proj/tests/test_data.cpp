#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "scatter_bayes/data.hpp"
#include "scatter_bayes/geometry.hpp"

using namespace scatter_bayes;
using std::numbers::pi;

namespace {

ApertureConfig aperture(ObservationKind o, IncidentKind i) {
  ApertureConfig a;
  a.obs_kind = o;
  a.inc_kind = i;
  return a;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("scatter_bayes_test_" + name);
}

}  // namespace

TEST(Apertures, AngleCounts) {
  EXPECT_EQ(observation_angles(aperture(ObservationKind::Gamma1, IncidentKind::Gamma2)).obs.size(), 64u);
  EXPECT_EQ(observation_angles(aperture(ObservationKind::Gamma2, IncidentKind::Gamma2)).obs.size(), 33u);
  EXPECT_EQ(observation_angles(aperture(ObservationKind::Gamma3, IncidentKind::Gamma2)).obs.size(), 17u);
}

TEST(Apertures, EndpointsAndIncidents) {
  const auto half = observation_angles(aperture(ObservationKind::Gamma2, IncidentKind::Gamma1));
  EXPECT_EQ(half.obs.front(), 0.0);
  EXPECT_NEAR(half.obs.back(), pi, 1e-12);
  EXPECT_EQ(half.inc, std::vector<double>{0.0});
  const auto full = observation_angles(aperture(ObservationKind::Gamma1, IncidentKind::Gamma2));
  EXPECT_LT(full.obs.back(), kTwoPi - 1e-6);
  EXPECT_EQ(full.inc, (std::vector<double>{pi / 2, 3 * pi / 2}));
}

TEST(Apertures, SmallerApertureNeverHasMoreAngles) {
  const auto n1 = observation_angles(aperture(ObservationKind::Gamma1, IncidentKind::Gamma1)).obs.size();
  const auto n2 = observation_angles(aperture(ObservationKind::Gamma2, IncidentKind::Gamma1)).obs.size();
  const auto n3 = observation_angles(aperture(ObservationKind::Gamma3, IncidentKind::Gamma1)).obs.size();
  EXPECT_GE(n1, n2);
  EXPECT_GE(n2, n3);
}

TEST(Apertures, CustomAndValidation) {
  ApertureConfig a;
  a.obs_kind = ObservationKind::Custom;
  a.obs_from = 1.0;
  a.obs_to = 2.0;
  a.obs_spacing = 0.25;
  a.inc_kind = IncidentKind::Custom;
  a.inc_custom = {0.1, 0.2, 0.3};
  const auto ang = observation_angles(a);
  EXPECT_EQ(ang.obs.size(), 5u);
  EXPECT_EQ(ang.inc.size(), 3u);
  a.inc_custom.clear();
  EXPECT_THROW(observation_angles(a), ConfigError);
  a = {};
  a.obs_spacing = 0.0;
  EXPECT_THROW(observation_angles(a), ConfigError);
  EXPECT_THROW(parse_observation_kind("gamma4_o"), ConfigError);
  for (auto k : {ObservationKind::Gamma1, ObservationKind::Gamma2, ObservationKind::Gamma3})
    EXPECT_EQ(parse_observation_kind(to_string(k)), k);
}

TEST(Observations, ZeroNoiseEqualsForwardMap) {
  const auto kite = catalog_shape("kite");
  ScatteringConfig cfg;
  const auto ap = aperture(ObservationKind::Gamma1, IncidentKind::Gamma2);
  const auto obs = make_observations(kite, cfg, ap, NoiseConfig{0.0, 0.0, 1});
  const auto clean = forward_map(kite, cfg, ap);
  EXPECT_TRUE((obs.y.values.array() == clean.values.array()).all());
  EXPECT_EQ(obs.sigma, 0.0);
  EXPECT_EQ(obs.y.values.rows(), 64);
  EXPECT_EQ(obs.y.values.cols(), 2);
}

TEST(Observations, NoiseLevelAndSigma) {
  // Many observation angles so the sample std is tight.
  ApertureConfig ap;
  ap.obs_spacing = kTwoPi / 2048;
  ap.inc_kind = IncidentKind::Gamma2;
  const auto c = circle(Point::Zero(), 1.0);
  ScatteringConfig cfg;
  const NoiseConfig noise{0.02, 0.01, 99};
  const auto noisy = make_observations(c, cfg, ap, noise);
  const auto clean = forward_map(c, cfg, ap);
  const double scale = clean.values.cwiseAbs().maxCoeff();
  const Eigen::MatrixXcd e = (noisy.y.values - clean.values) / scale;
  const double n = double(e.size());
  const double sd_re = std::sqrt(e.real().array().square().sum() / n);
  const double sd_im = std::sqrt(e.imag().array().square().sum() / n);
  EXPECT_NEAR(sd_re, 0.02, 0.03 * 0.02);
  EXPECT_NEAR(sd_im, 0.01, 0.03 * 0.01);
  EXPECT_NEAR(noisy.sigma, 0.02 * scale, 1e-15);
}

TEST(Observations, DeterministicPerSeed) {
  const auto pear = catalog_shape("pear");
  ScatteringConfig cfg;
  ApertureConfig ap;
  const auto a = make_observations(pear, cfg, ap, NoiseConfig{0.01, 0.01, 5});
  const auto b = make_observations(pear, cfg, ap, NoiseConfig{0.01, 0.01, 5});
  const auto c = make_observations(pear, cfg, ap, NoiseConfig{0.01, 0.01, 6});
  EXPECT_TRUE((a.y.values.array() == b.y.values.array()).all());
  EXPECT_FALSE((a.y.values.array() == c.y.values.array()).all());
}

TEST(Observations, NegativeNoiseRejected) {
  EXPECT_THROW(make_observations(circle(Point::Zero(), 1), ScatteringConfig{}, ApertureConfig{},
                                 NoiseConfig{-0.1, 0.0, 1}),
               ConfigError);
}

TEST(ObservationFile, RoundTripIsBitIdentical) {
  ApertureConfig ap;
  ap.inc_kind = IncidentKind::Custom;
  ap.inc_custom = {0.1, 2.0 / 3.0};
  const auto set = make_observations(catalog_shape("acorn").translated(Point(0.1, 0.0)), ScatteringConfig{},
                                     ap, NoiseConfig{0.01, 0.02, 18446744073709551557ULL},
                                     TruthMeta{"acorn", 1.0, Point(0.1, 0.0)});
  const auto path = temp_file("roundtrip.txt");
  save_observations(set, path);
  const auto back = load_observations(path);
  EXPECT_TRUE((back.y.values.array() == set.y.values.array()).all());
  EXPECT_EQ(back.y.obs_angles, set.y.obs_angles);
  EXPECT_EQ(back.y.inc_angles, set.y.inc_angles);
  EXPECT_EQ(back.sigma, set.sigma);
  EXPECT_EQ(back.noise.seed, set.noise.seed);
  EXPECT_EQ(back.apertures.inc_custom, ap.inc_custom);
  ASSERT_TRUE(back.truth.has_value());
  EXPECT_EQ(back.truth->shape, "acorn");
  EXPECT_EQ(back.truth->center, Point(0.1, 0.0));
  // Serializing again gives the same bytes.
  EXPECT_EQ(serialize_observations(back), serialize_observations(set));
  std::filesystem::remove(path);
}

TEST(ObservationFile, TruncatedFileNamesMissingSection) {
  const auto set = make_observations(circle(Point::Zero(), 1), ScatteringConfig{}, ApertureConfig{},
                                     NoiseConfig{});
  auto text = serialize_observations(set);
  std::istringstream cut(text.substr(0, text.find("data ")));
  try {
    parse_observations(cut);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("data"), std::string::npos) << e.what();
  }
  std::istringstream no_end(text.substr(0, text.rfind("end")));
  EXPECT_THROW(parse_observations(no_end), ParseError);
}

TEST(ObservationFile, VersionMismatch) {
  std::istringstream in("scatter_bayes_observations 2\nkappa 1\n");
  try {
    parse_observations(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(ObservationFile, BadFieldReportsLine) {
  std::istringstream in("scatter_bayes_observations 1\nkappa one\n");
  try {
    parse_observations(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream unknown("scatter_bayes_observations 1\ncolour red\n");
  EXPECT_THROW(parse_observations(unknown), ParseError);
}

TEST(ObservationFile, MissingFile) {
  EXPECT_THROW(load_observations(temp_file("does_not_exist.txt")), ParseError);
}
