#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scatter_bayes/errors.hpp"

namespace scatter_bayes {

using Point = Eigen::Vector2d;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Closed, regular, counterclockwise curve x: [0, 2pi) -> R^2.
///
/// Besides position and tangent the curve carries its exact second
/// derivative; the Nystrom diagonal of the double-layer kernel needs it.
class ParametricCurve {
 public:
  using Map = std::function<Point(double)>;

  ParametricCurve(Map position, Map tangent, Map acceleration, bool corner_at_zero = false)
      : position_(std::move(position)),
        tangent_(std::move(tangent)),
        acceleration_(std::move(acceleration)),
        corner_at_zero_(corner_at_zero) {}

  Point position(double t) const { return position_(t); }
  Point tangent(double t) const { return tangent_(t); }
  Point acceleration(double t) const { return acceleration_(t); }

  /// True when the tangent jumps at t = 0 (position is still continuous).
  bool corner_at_zero() const { return corner_at_zero_; }

  /// Positions at n equispaced parameters 2*pi*j/n.
  std::vector<Point> sample(int n) const {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) pts.push_back(position_(kTwoPi * j / n));
    return pts;
  }

  /// The same curve rigidly shifted by `offset`.
  ParametricCurve translated(const Point& offset) const {
    return ParametricCurve([p = position_, offset](double t) -> Point { return p(t) + offset; },
                           tangent_, acceleration_, corner_at_zero_);
  }

 private:
  Map position_;
  Map tangent_;
  Map acceleration_;
  bool corner_at_zero_ = false;
};

/// Sigmoidal substitution t = w(s) on [0, 2pi] whose first p-1 derivatives
/// vanish at both endpoints; returns {w, w', w''}.
inline std::array<double, 3> graded_substitution(double s, int p) {
  const double pi = std::numbers::pi;
  const double c = 1.0 / p - 0.5;
  auto v = [&](double x) {
    const double u = (pi - x) / pi;
    return std::array<double, 3>{c * u * u * u + (x - pi) / (p * pi) + 0.5,
                                 -3.0 * c * u * u / pi + 1.0 / (p * pi), 6.0 * c * u / (pi * pi)};
  };
  const auto va = v(s);
  auto vb = v(kTwoPi - s);
  vb[1] = -vb[1];
  auto powers = [p](const std::array<double, 3>& f) {
    const double fp1 = f[0] > 0 ? std::pow(f[0], p - 1) : 0.0;
    const double fp2 = f[0] > 0 ? std::pow(f[0], p - 2) : (p == 2 ? 1.0 : 0.0);
    return std::array<double, 3>{std::pow(f[0], p), p * fp1 * f[1],
                                 p * (p - 1) * fp2 * f[1] * f[1] + p * fp1 * f[2]};
  };
  const auto a = powers(va);
  const auto b = powers(vb);
  const double sum = a[0] + b[0], dsum = a[1] + b[1];
  const double num1 = a[1] * b[0] - a[0] * b[1];
  const double num2 = a[2] * b[0] - a[0] * b[2];
  return {kTwoPi * a[0] / sum, kTwoPi * num1 / (sum * sum),
          kTwoPi * (num2 * sum - 2.0 * num1 * dsum) / (sum * sum * sum)};
}

/// Reparametrize a curve with a corner at t = 0 by the graded substitution.
/// The result is smooth and periodic but its tangent vanishes at s = 0.
inline ParametricCurve graded_curve(const ParametricCurve& curve, int p) {
  return ParametricCurve(
      [=](double s) -> Point { return curve.position(graded_substitution(s, p)[0]); },
      [=](double s) -> Point {
        const auto w = graded_substitution(s, p);
        return curve.tangent(w[0]) * w[1];
      },
      [=](double s) -> Point {
        const auto w = graded_substitution(s, p);
        return curve.acceleration(w[0]) * w[1] * w[1] + curve.tangent(w[0]) * w[2];
      });
}

/// Curve center + r(theta) (cos theta, sin theta) from a radius function and
/// its first two derivatives.
template <class R, class DR, class DDR>
ParametricCurve radial_curve(const Point& center, R r, DR dr, DDR ddr) {
  return ParametricCurve(
      [=](double t) -> Point { return center + r(t) * Point(std::cos(t), std::sin(t)); },
      [=](double t) -> Point {
        const Point e(std::cos(t), std::sin(t));
        const Point e_perp(-std::sin(t), std::cos(t));
        return dr(t) * e + r(t) * e_perp;
      },
      [=](double t) -> Point {
        const Point e(std::cos(t), std::sin(t));
        const Point e_perp(-std::sin(t), std::cos(t));
        return (ddr(t) - r(t)) * e + 2.0 * dr(t) * e_perp;
      });
}

inline ParametricCurve circle(const Point& center, double radius) {
  return radial_curve(
      center, [radius](double) { return radius; }, [](double) { return 0.0; },
      [](double) { return 0.0; });
}

/// Real trigonometric polynomial
///   q(theta) = c0 + sum_{k>=1} a_k cos(k theta) + b_k sin(k theta),
/// used as the log-radius of a star-shaped boundary.
class TrigSeries {
 public:
  TrigSeries() = default;
  TrigSeries(double constant, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
      : constant_(constant), cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
    const auto k = std::max(cos_.size(), sin_.size());
    cos_.resize(k, 0.0);
    sin_.resize(k, 0.0);
  }

  double constant() const { return constant_; }
  const std::vector<double>& cos_coeffs() const { return cos_; }
  const std::vector<double>& sin_coeffs() const { return sin_; }
  int max_frequency() const { return static_cast<int>(cos_.size()); }

  /// Value and first two derivatives at theta.
  std::array<double, 3> evaluate(double theta) const {
    double v = constant_, d1 = 0.0, d2 = 0.0;
    const double c1 = std::cos(theta), s1 = std::sin(theta);
    double ck = 1.0, sk = 0.0;
    for (std::size_t i = 0; i < cos_.size(); ++i) {
      const double next_c = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = next_c;
      const double k = static_cast<double>(i + 1);
      v += cos_[i] * ck + sin_[i] * sk;
      d1 += k * (sin_[i] * ck - cos_[i] * sk);
      d2 -= k * k * (cos_[i] * ck + sin_[i] * sk);
    }
    return {v, d1, d2};
  }

  double operator()(double theta) const { return evaluate(theta)[0]; }

  TrigSeries scaled(double factor) const {
    auto c = cos_, s = sin_;
    for (auto& x : c) x *= factor;
    for (auto& x : s) x *= factor;
    return {constant_ * factor, std::move(c), std::move(s)};
  }

 private:
  double constant_ = 0.0;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

inline constexpr double kDefaultRMax = 10.0;

/// Star-shaped boundary center + exp(q(theta)) (cos theta, sin theta).
class StarShapedCurve {
 public:
  StarShapedCurve(Point center, TrigSeries log_radius, double r_max = kDefaultRMax)
      : center_(std::move(center)), log_radius_(std::move(log_radius)), r_max_(r_max) {}

  const Point& center() const { return center_; }
  const TrigSeries& log_radius() const { return log_radius_; }
  double r_max() const { return r_max_; }

  double radius(double theta) const { return std::exp(log_radius_(theta)); }

  /// Throws InvalidShapeError unless 0 < r < r_max on an n-point grid.
  void validate(int n = 512) const {
    for (int j = 0; j < n; ++j) {
      const double th = kTwoPi * j / n;
      const double q = log_radius_(th);
      if (!std::isfinite(q)) throw InvalidShapeError("non-finite log-radius");
      if (std::exp(q) >= r_max_) throw InvalidShapeError("radius exceeds r_max");
    }
  }

  ParametricCurve curve() const {
    const auto q = log_radius_;
    return radial_curve(
        center_, [q](double t) { return std::exp(q(t)); },
        [q](double t) {
          const auto v = q.evaluate(t);
          return std::exp(v[0]) * v[1];
        },
        [q](double t) {
          const auto v = q.evaluate(t);
          return std::exp(v[0]) * (v[2] + v[1] * v[1]);
        });
  }

 private:
  Point center_;
  TrigSeries log_radius_;
  double r_max_;
};

inline StarShapedCurve star_curve(const Point& center, const TrigSeries& log_radius,
                                  double r_max = kDefaultRMax) {
  return StarShapedCurve(center, log_radius, r_max);
}

// ---------------------------------------------------------------------------
// Benchmark obstacles

struct ShapeCatalogEntry {
  std::string name;
  std::string formula;
  bool radial = false;  // given as r(theta) about the origin
  ParametricCurve curve;
  std::function<double(double)> radius;  // empty for parametric entries
};

namespace detail {

// r = scale * f^(1/2) with derivatives from f, f', f''.
template <class F>
ShapeCatalogEntry sqrt_radial(std::string name, std::string formula, double scale, F f) {
  auto r = [=](double t) { return scale * std::sqrt(f(t)[0]); };
  auto dr = [=](double t) {
    const auto v = f(t);
    return 0.5 * scale * v[1] / std::sqrt(v[0]);
  };
  auto ddr = [=](double t) {
    const auto v = f(t);
    return scale * (-0.25 * v[1] * v[1] / std::pow(v[0], 1.5) + 0.5 * v[2] / std::sqrt(v[0]));
  };
  return {std::move(name), std::move(formula), true, radial_curve(Point::Zero(), r, dr, ddr), r};
}

template <class R, class DR, class DDR>
ShapeCatalogEntry radial_entry(std::string name, std::string formula, R r, DR dr, DDR ddr) {
  return {std::move(name), std::move(formula), true, radial_curve(Point::Zero(), r, dr, ddr), r};
}

}  // namespace detail

inline const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {"kite",     "roundrect", "acorn", "pear",
                                                 "bean",     "threelobes", "star", "cloverleaf",
                                                 "peanut",   "drop"};
  return names;
}

/// Bean and peanut share the same radius formula in the benchmark table.
inline bool has_duplicate_formula(std::string_view name) {
  return name == "bean" || name == "peanut";
}

inline ShapeCatalogEntry catalog_entry(std::string_view name) {
  using std::cos;
  using std::exp;
  using std::sin;
  if (name == "kite") {
    return {"kite", "(x1, x2) = (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)", false,
            ParametricCurve(
                [](double t) -> Point {
                  return {cos(t) + 0.65 * cos(2 * t) - 0.65, 1.5 * sin(t)};
                },
                [](double t) -> Point { return {-sin(t) - 1.3 * sin(2 * t), 1.5 * cos(t)}; },
                [](double t) -> Point { return {-cos(t) - 2.6 * cos(2 * t), -1.5 * sin(t)}; }),
            {}};
  }
  if (name == "roundrect") {
    constexpr double k = 16.0 / 81.0;  // (2/3)^4
    auto f = [](double t) {
      const double c = cos(t), s = sin(t);
      return std::array<double, 3>{
          c * c * c * c + k * s * s * s * s, -4 * c * c * c * s + 4 * k * s * s * s * c,
          12 * c * c * s * s - 4 * c * c * c * c + 12 * k * s * s * c * c - 4 * k * s * s * s * s};
    };
    return detail::radial_entry(
        "roundrect", "r = (cos^4 t + (2/3 sin t)^4)^(-1/4)",
        [=](double t) { return std::pow(f(t)[0], -0.25); },
        [=](double t) {
          const auto v = f(t);
          return -0.25 * std::pow(v[0], -1.25) * v[1];
        },
        [=](double t) {
          const auto v = f(t);
          return 5.0 / 16.0 * std::pow(v[0], -2.25) * v[1] * v[1] -
                 0.25 * std::pow(v[0], -1.25) * v[2];
        });
  }
  if (name == "acorn") {
    return detail::sqrt_radial("acorn", "r = 3/5 sqrt(17/4 + 2 cos 3t)", 0.6, [](double t) {
      return std::array<double, 3>{4.25 + 2 * cos(3 * t), -6 * sin(3 * t), -18 * cos(3 * t)};
    });
  }
  if (name == "pear") {
    return detail::radial_entry(
        "pear", "r = (5 + sin 3t) / 6", [](double t) { return (5 + sin(3 * t)) / 6; },
        [](double t) { return 0.5 * cos(3 * t); }, [](double t) { return -1.5 * sin(3 * t); });
  }
  if (name == "bean" || name == "peanut") {
    auto e = detail::sqrt_radial(std::string(name), "r = 0.4 sqrt(4 cos^2 t + sin^2 t)", 0.4,
                                 [](double t) {
                                   const double c = cos(t);
                                   return std::array<double, 3>{3 * c * c + 1, -3 * sin(2 * t),
                                                                -6 * cos(2 * t)};
                                 });
    return e;
  }
  if (name == "threelobes") {
    return detail::radial_entry(
        "threelobes", "r = 0.5 + 0.25 exp(-sin 3t) - 0.1 sin t",
        [](double t) { return 0.5 + 0.25 * exp(-sin(3 * t)) - 0.1 * sin(t); },
        [](double t) { return -0.75 * exp(-sin(3 * t)) * cos(3 * t) - 0.1 * cos(t); },
        [](double t) {
          const double c3 = cos(3 * t), s3 = sin(3 * t);
          return 0.25 * exp(-s3) * (9 * c3 * c3 + 9 * s3) + 0.1 * sin(t);
        });
  }
  if (name == "star") {
    return detail::radial_entry(
        "star", "r = 1 + 0.3 sin 5t", [](double t) { return 1 + 0.3 * sin(5 * t); },
        [](double t) { return 1.5 * cos(5 * t); }, [](double t) { return -7.5 * sin(5 * t); });
  }
  if (name == "cloverleaf") {
    return detail::radial_entry(
        "cloverleaf", "r = 1 + 0.3 cos 4t", [](double t) { return 1 + 0.3 * cos(4 * t); },
        [](double t) { return -1.2 * sin(4 * t); }, [](double t) { return -4.8 * cos(4 * t); });
  }
  if (name == "drop") {
    // Parameter range (0, 2pi]; the corner sits at t = 0 ~ 2pi.
    return {"drop", "(x1, x2) = (-1 + 2 sin(t/2), -sin t)", false,
            ParametricCurve([](double t) -> Point { return {-1 + 2 * sin(t / 2), -sin(t)}; },
                            [](double t) -> Point { return {cos(t / 2), -cos(t)}; },
                            [](double t) -> Point { return {-0.5 * sin(t / 2), sin(t)}; },
                            /*corner_at_zero=*/true),
            {}};
  }
  std::string valid;
  for (const auto& n : catalog_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown shape '" + std::string(name) + "'; valid shapes: " + valid);
}

inline ParametricCurve catalog_shape(std::string_view name) { return catalog_entry(name).curve; }

// ---------------------------------------------------------------------------
// Shape comparison

/// Symmetric Hausdorff distance between two finite point sets.
inline double hausdorff_distance(std::span<const Point> a, std::span<const Point> b) {
  auto directed = [](std::span<const Point> from, std::span<const Point> to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).squaredNorm());
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

/// Hausdorff distance between n-point samplings of two curves.
inline double boundary_discrepancy(const ParametricCurve& a, const ParametricCurve& b, int n) {
  if (n < 16) throw ConfigError("boundary_discrepancy needs at least 16 sample points");
  const auto pa = a.sample(n);
  const auto pb = b.sample(n);
  return hausdorff_distance(pa, pb);
}

/// Distance from `center` to the curve along the ray at angle theta, for a
/// curve star-shaped about `center`. Uses the polygon through n samples.
inline double ray_radius(const std::vector<Point>& polygon, const Point& center, double theta) {
  const Point dir(std::cos(theta), std::sin(theta));
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = polygon[i] - center;
    const Point b = polygon[(i + 1) % n] - center;
    const Point e = b - a;
    // Solve s*dir = a + u*e for s >= 0, u in [0, 1].
    const double den = dir.x() * (-e.y()) - dir.y() * (-e.x());
    if (std::abs(den) < 1e-300) continue;
    const double s = (a.x() * (-e.y()) - a.y() * (-e.x())) / den;
    const double u = (dir.x() * a.y() - dir.y() * a.x()) / den;
    if (s > 0 && u >= -1e-12 && u <= 1 + 1e-12) best = std::min(best, s);
  }
  return best;
}

}  // namespace scatter_bayes
