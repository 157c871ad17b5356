#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "scatter_bayes/geometry.hpp"

using namespace scatter_bayes;
using std::numbers::pi;

namespace {

// Independent Hausdorff: explicit double loop over indices, no helpers shared
// with the library.
double hausdorff_oracle(const std::vector<Point>& a, const std::vector<Point>& b) {
  double h = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const auto& from = pass == 0 ? a : b;
    const auto& to = pass == 0 ? b : a;
    for (std::size_t i = 0; i < from.size(); ++i) {
      double d = 1e300;
      for (std::size_t j = 0; j < to.size(); ++j) {
        const double dx = from[i][0] - to[j][0], dy = from[i][1] - to[j][1];
        d = std::min(d, std::hypot(dx, dy));
      }
      h = std::max(h, d);
    }
  }
  return h;
}

}  // namespace

TEST(Catalog, HasTenNamedShapes) {
  EXPECT_EQ(catalog_names().size(), 10u);
  for (const auto& n : catalog_names()) EXPECT_EQ(catalog_entry(n).name, n);
}

TEST(Catalog, UnknownNameListsValidOnes) {
  try {
    catalog_entry("teapot");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("teapot"), std::string::npos);
    EXPECT_NE(msg.find("cloverleaf"), std::string::npos);
  }
}

TEST(Catalog, KnownValues) {
  const Point k0 = catalog_shape("kite").position(0.0);
  EXPECT_NEAR(k0.x(), 1.0, 1e-15);
  EXPECT_NEAR(k0.y(), 0.0, 1e-15);
  EXPECT_NEAR(catalog_entry("pear").radius(pi / 2), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(catalog_entry("star").radius(pi / 10), 1.3, 1e-15);
  EXPECT_NEAR(catalog_entry("cloverleaf").radius(0.0), 1.3, 1e-15);
  EXPECT_NEAR(catalog_entry("acorn").radius(0.0), 0.6 * std::sqrt(6.25), 1e-15);
  EXPECT_NEAR(catalog_entry("roundrect").radius(0.0), 1.0, 1e-15);
  EXPECT_NEAR(catalog_entry("roundrect").radius(pi / 2), 1.5, 1e-14);
}

TEST(Catalog, DuplicateFormulaFlag) {
  for (const auto& n : catalog_names())
    EXPECT_EQ(has_duplicate_formula(n), n == "bean" || n == "peanut") << n;
  EXPECT_EQ(catalog_entry("bean").formula, catalog_entry("peanut").formula);
}

TEST(Catalog, DerivativesMatchFiniteDifferences) {
  const double h = 1e-4;
  for (const auto& n : catalog_names()) {
    const auto c = catalog_shape(n);
    for (int j = 1; j < 32; ++j) {  // avoid the drop corner at t = 0
      const double t = kTwoPi * j / 32 + 0.01;
      const Point fd1 = (c.position(t + h) - c.position(t - h)) / (2 * h);
      const Point fd2 = (c.tangent(t + h) - c.tangent(t - h)) / (2 * h);
      EXPECT_LT((fd1 - c.tangent(t)).norm(), 1e-6) << n << " t=" << t;
      EXPECT_LT((fd2 - c.acceleration(t)).norm(), 1e-6) << n << " t=" << t;
    }
  }
}

TEST(Catalog, RadialShapesHavePositiveRadius) {
  for (const auto& n : catalog_names()) {
    const auto e = catalog_entry(n);
    if (!e.radial) continue;
    double lo = 1e300;
    for (int j = 0; j < 4096; ++j) lo = std::min(lo, e.radius(kTwoPi * j / 4096));
    EXPECT_GT(lo, 0.0) << n;
  }
}

TEST(Catalog, CurvesAreCounterclockwise) {
  for (const auto& n : catalog_names()) {
    const auto pts = catalog_shape(n).sample(2048);
    double area = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      const auto& q = pts[(i + 1) % pts.size()];
      area += p.x() * q.y() - q.x() * p.y();
    }
    EXPECT_GT(area, 0.0) << n;
  }
}

TEST(Curve, TranslationShiftsPositionOnly) {
  const auto c = catalog_shape("kite");
  const Point v(0.3, -0.2);
  const auto d = c.translated(v);
  for (double t : {0.0, 1.0, 2.5, 4.0}) {
    EXPECT_LT((d.position(t) - c.position(t) - v).norm(), 1e-15);
    EXPECT_EQ(d.tangent(t), c.tangent(t));
    EXPECT_EQ(d.acceleration(t), c.acceleration(t));
  }
}

TEST(Curve, CircleRadiusAndCenter) {
  const auto c = circle(Point(1, 2), 0.5);
  for (const auto& p : c.sample(64)) EXPECT_NEAR((p - Point(1, 2)).norm(), 0.5, 1e-15);
}

TEST(Curve, GradedSubstitutionIsMonotoneAndFlatAtEnds) {
  double prev = -1.0;
  for (int j = 0; j <= 200; ++j) {
    const double s = kTwoPi * j / 200;
    const auto w = graded_substitution(s, 8);
    EXPECT_GE(w[0], prev);
    prev = w[0];
  }
  EXPECT_NEAR(graded_substitution(0.0, 8)[0], 0.0, 1e-15);
  EXPECT_NEAR(graded_substitution(kTwoPi, 8)[0], kTwoPi, 1e-12);
  EXPECT_NEAR(graded_substitution(pi, 8)[0], pi, 1e-12);
  EXPECT_LT(graded_substitution(1e-3, 8)[1], 1e-12);
  // derivatives vs finite differences
  const double h = 1e-5;
  for (double s : {0.5, 1.7, 3.0, 4.4, 5.9}) {
    const auto w = graded_substitution(s, 8);
    const double d1 = (graded_substitution(s + h, 8)[0] - graded_substitution(s - h, 8)[0]) / (2 * h);
    const double d2 = (graded_substitution(s + h, 8)[1] - graded_substitution(s - h, 8)[1]) / (2 * h);
    EXPECT_NEAR(w[1], d1, 1e-6 * std::max(1.0, std::abs(d1)));
    EXPECT_NEAR(w[2], d2, 1e-5 * std::max(1.0, std::abs(d2)));
  }
}

TEST(TrigSeries, DerivativesMatchDirectSum) {
  const TrigSeries q(0.1, {0.2, -0.05, 0.01}, {0.0, 0.3});
  for (double th : {0.0, 0.7, 2.0, 5.5}) {
    double v = 0.1, d1 = 0, d2 = 0;
    const std::vector<double> a{0.2, -0.05, 0.01}, b{0.0, 0.3, 0.0};
    for (int k = 1; k <= 3; ++k) {
      v += a[k - 1] * std::cos(k * th) + b[k - 1] * std::sin(k * th);
      d1 += k * (-a[k - 1] * std::sin(k * th) + b[k - 1] * std::cos(k * th));
      d2 += -k * k * (a[k - 1] * std::cos(k * th) + b[k - 1] * std::sin(k * th));
    }
    const auto e = q.evaluate(th);
    EXPECT_NEAR(e[0], v, 1e-14);
    EXPECT_NEAR(e[1], d1, 1e-14);
    EXPECT_NEAR(e[2], d2, 1e-14);
  }
  EXPECT_EQ(q.max_frequency(), 3);
}

TEST(StarShaped, ZeroLogRadiusIsUnitCircle) {
  const auto c = StarShapedCurve(Point(0.2, -0.1), TrigSeries(0.0, {}, {})).curve();
  for (const auto& p : c.sample(32)) EXPECT_NEAR((p - Point(0.2, -0.1)).norm(), 1.0, 1e-15);
}

TEST(StarShaped, ValidateRejectsRadiusAboveBound) {
  EXPECT_NO_THROW(StarShapedCurve(Point::Zero(), TrigSeries(std::log(9.0), {}, {})).validate());
  EXPECT_THROW(StarShapedCurve(Point::Zero(), TrigSeries(std::log(11.0), {}, {})).validate(), InvalidShapeError);
  EXPECT_THROW(StarShapedCurve(Point::Zero(), TrigSeries(NAN, {}, {})).validate(), InvalidShapeError);
}

TEST(StarShaped, DerivativesMatchFiniteDifferences) {
  const auto c = StarShapedCurve(Point(0.1, 0.0), TrigSeries(0.05, {0.1, 0.02}, {-0.1, 0.0, 0.03})).curve();
  const double h = 1e-4;
  for (double t : {0.3, 1.9, 4.2}) {
    EXPECT_LT(((c.position(t + h) - c.position(t - h)) / (2 * h) - c.tangent(t)).norm(), 1e-6);
    EXPECT_LT(((c.tangent(t + h) - c.tangent(t - h)) / (2 * h) - c.acceleration(t)).norm(), 1e-6);
  }
}

TEST(Discrepancy, IdenticalCurvesGiveZero) {
  for (const auto& n : catalog_names()) {
    const auto c = catalog_shape(n);
    EXPECT_EQ(boundary_discrepancy(c, c, 256), 0.0) << n;
  }
}

TEST(Discrepancy, ConcentricCircles) {
  EXPECT_NEAR(boundary_discrepancy(circle(Point::Zero(), 1.0), circle(Point::Zero(), 1.1), 256), 0.1, 1e-12);
}

TEST(Discrepancy, OffsetCircles) {
  const double d = boundary_discrepancy(circle(Point::Zero(), 1.0), circle(Point(0.2, 0.0), 1.0), 512);
  EXPECT_NEAR(d, 0.2, 1e-3);
}

TEST(Discrepancy, SymmetricAndTriangle) {
  const auto a = catalog_shape("kite"), b = catalog_shape("pear"), c = catalog_shape("star");
  const double ab = boundary_discrepancy(a, b, 256), ba = boundary_discrepancy(b, a, 256);
  EXPECT_EQ(ab, ba);
  EXPECT_LE(ab, boundary_discrepancy(a, c, 256) + boundary_discrepancy(c, b, 256) + 1e-12);
}

TEST(Discrepancy, MatchesBruteForceOracle) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Point> a, b;
    for (int i = 0; i < 60; ++i) a.emplace_back(g(rng), g(rng));
    for (int i = 0; i < 45; ++i) b.emplace_back(g(rng), g(rng));
    EXPECT_NEAR(hausdorff_distance(a, b), hausdorff_oracle(a, b), 1e-14);
  }
  const auto ka = catalog_shape("kite").sample(128), kb = catalog_shape("drop").sample(128);
  EXPECT_NEAR(hausdorff_distance(ka, kb), hausdorff_oracle(ka, kb), 1e-14);
}

TEST(Discrepancy, RejectsCoarseSampling) {
  EXPECT_THROW(boundary_discrepancy(circle(Point::Zero(), 1), circle(Point::Zero(), 1), 8), ConfigError);
}

TEST(RayRadius, CircleAboutOffsetCenter) {
  const auto poly = circle(Point::Zero(), 1.0).sample(4096);
  // From (0.5, 0) the ray along +x hits at distance 0.5, along -x at 1.5.
  EXPECT_NEAR(ray_radius(poly, Point(0.5, 0), 0.0), 0.5, 1e-6);
  EXPECT_NEAR(ray_radius(poly, Point(0.5, 0), pi), 1.5, 1e-6);
}
