#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scatter_bayes/errors.hpp"
#include "scatter_bayes/geometry.hpp"
#include "scatter_bayes/special.hpp"

namespace scatter_bayes {

using cdouble = std::complex<double>;

struct ScatteringConfig {
  double kappa = 1.0;
  int n_quad = 64;
  /// Coupling constant of the combined potential; defaults to kappa.
  std::optional<double> coupling;

  double eta() const { return coupling.value_or(kappa); }

  void validate() const {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive");
    if (n_quad < 16 || n_quad % 2 != 0)
      throw ConfigError("n_quad must be even and >= 16, got " + std::to_string(n_quad));
  }
};

/// Density values at the nodes t_j = 2 pi j / n_quad.
struct BoundaryDensity {
  Eigen::VectorXcd values;
};

/// u_inf(obs, inc): rows follow obs_angles, columns follow inc_angles.
struct FarFieldPattern {
  Eigen::MatrixXcd values;
  std::vector<double> obs_angles;
  std::vector<double> inc_angles;
};

inline Point direction(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Grading exponent used for curves with a corner at t = 0.
inline constexpr int kCornerGrading = 8;

/// Curve data sampled on the equispaced quadrature grid. Curves with a corner
/// are first reparametrized by the graded substitution, so the nodes cluster
/// at the corner and the corner node itself carries zero weight.
struct BoundaryNodes {
  std::vector<double> t;
  std::vector<Point> x;
  std::vector<Point> dx;
  std::vector<Point> ddx;

  BoundaryNodes(const ParametricCurve& input, int n) {
    const ParametricCurve curve =
        input.corner_at_zero() ? graded_curve(input, kCornerGrading) : input;
    t.resize(n);
    x.resize(n);
    dx.resize(n);
    ddx.resize(n);
    for (int j = 0; j < n; ++j) {
      t[j] = kTwoPi * j / n;
      x[j] = curve.position(t[j]);
      dx[j] = curve.tangent(t[j]);
      ddx[j] = curve.acceleration(t[j]);
    }
  }

  int size() const { return static_cast<int>(t.size()); }
};

/// Plane wave exp(i kappa x.d) at the n quadrature nodes of the curve.
inline Eigen::VectorXcd incident_trace(const ParametricCurve& curve, const Point& d, double kappa,
                                       int n) {
  const BoundaryNodes nodes(curve, n);
  Eigen::VectorXcd u(n);
  for (int j = 0; j < n; ++j) u[j] = std::exp(cdouble(0.0, kappa * nodes.x[j].dot(d)));
  return u;
}

/// Nystrom discretization of the combined double/single-layer equation for
/// the sound-soft exterior problem,
///   psi(t) - int_0^{2pi} [L(t,s) + i eta M(t,s)] psi(s) ds = -2 u_inc(x(t)),
/// with the logarithmic part of each kernel integrated by trigonometric
/// product weights. The matrix is assembled and factored once; each incident
/// direction is one extra back-substitution.
class NystromSolver {
 public:
  NystromSolver(const ParametricCurve& curve, const ScatteringConfig& cfg)
      : cfg_(cfg), nodes_((cfg.validate(), curve), cfg.n_quad) {
    assemble();
  }

  const BoundaryNodes& nodes() const { return nodes_; }
  const ScatteringConfig& config() const { return cfg_; }
  double rcond() const { return rcond_; }

  BoundaryDensity solve(const Point& d) const {
    const int n = nodes_.size();
    Eigen::VectorXcd rhs(n);
    for (int j = 0; j < n; ++j)
      rhs[j] = -2.0 * std::exp(cdouble(0.0, cfg_.kappa * nodes_.x[j].dot(d)));
    BoundaryDensity density{lu_.solve(rhs)};
    if (!density.values.allFinite()) throw SolverError("non-finite boundary density", rcond_);
    return density;
  }

  Eigen::VectorXcd far_field(const BoundaryDensity& density, std::span<const double> obs_angles) const {
    return far_field_from_nodes(nodes_, cfg_, density, obs_angles);
  }

  /// Far field of the combined potential with density psi, normalized so that
  /// u_s(x) ~ exp(i pi/4)/sqrt(8 pi kappa) exp(i kappa r)/sqrt(r) u_inf(xhat).
  static Eigen::VectorXcd far_field_from_nodes(const BoundaryNodes& nodes, const ScatteringConfig& cfg,
                                               const BoundaryDensity& density,
                                               std::span<const double> obs_angles) {
    const int n = nodes.size();
    if (density.values.size() != n) throw SolverError("density does not match the quadrature grid");
    const double kappa = cfg.kappa, eta = cfg.eta();
    const double w = kTwoPi / n;
    Eigen::VectorXcd out(static_cast<Eigen::Index>(obs_angles.size()));
    for (std::size_t k = 0; k < obs_angles.size(); ++k) {
      const Point xh = direction(obs_angles[k]);
      cdouble acc = 0.0;
      for (int j = 0; j < n; ++j) {
        const Point& dx = nodes.dx[j];
        const double nx = xh.x() * dx.y() - xh.y() * dx.x();  // xhat . (dx2, -dx1)
        const cdouble factor(0.0, -(kappa * nx + eta * dx.norm()));
        acc += factor * std::exp(cdouble(0.0, -kappa * xh.dot(nodes.x[j]))) * density.values[j];
      }
      out[static_cast<Eigen::Index>(k)] = w * acc;
    }
    return out;
  }

 private:
  void assemble() {
    const int N = nodes_.size();
    const int n = N / 2;
    const double kappa = cfg_.kappa, eta = cfg_.eta();
    const double pi = std::numbers::pi;
    const double euler = std::numbers::egamma;
    const cdouble I(0.0, 1.0);

    // Product weights R_k and log(4 sin^2((t_i - t_j)/2)) depend only on i - j.
    std::vector<double> R(N), logterm(N, 0.0);
    for (int k = 0; k < N; ++k) {
      double s = 0.0;
      for (int m = 1; m < n; ++m) s += std::cos(m * k * pi / n) / m;
      R[k] = -2.0 * pi / n * s - pi / (double(n) * n) * (k % 2 == 0 ? 1.0 : -1.0);
      if (k != 0) {
        const double sn = std::sin(k * pi / N);
        logterm[k] = std::log(4.0 * sn * sn);
      }
    }

    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(N, N);
    const double w = pi / n;
    for (int i = 0; i < N; ++i) {
      const Point& xi = nodes_.x[i];
      for (int j = i; j < N; ++j) {
        if (i == j) {
          const Point& dx = nodes_.dx[i];
          const Point& ddx = nodes_.ddx[i];
          const double speed = dx.norm();
          if (speed == 0.0) continue;  // graded corner node: kernel weight vanishes
          const double l2 = (dx.x() * ddx.y() - dx.y() * ddx.x()) / (2.0 * pi * speed * speed);
          const double m1 = -speed / (2.0 * pi);
          const cdouble m2 = (0.5 * I - euler / pi - std::log(kappa * speed / 2.0) / pi) * speed;
          const cdouble k1 = I * eta * m1;
          const cdouble k2 = l2 + I * eta * m2;
          A(i, i) -= R[0] * k1 + w * k2;
          continue;
        }
        const Point diff = xi - nodes_.x[j];
        const double r = diff.norm();
        if (!(r > 0.0)) throw SolverError("coincident boundary nodes; curve is not simple");
        const auto b = bessel01(kappa * r);
        const cdouble h0(b.j0, b.y0), h1(b.j1, b.y1);
        const int k = (j - i) % N;
        const double lg = logterm[k];
        const double rw = R[k];
        // (i, j): target t_i, source t_j; then the transposed pair.
        for (int pass = 0; pass < 2; ++pass) {
          const int row = pass == 0 ? i : j;
          const int col = pass == 0 ? j : i;
          const Point& dxs = nodes_.dx[col];
          const Point rvec = nodes_.x[row] - nodes_.x[col];  // x(t) - x(s)
          const double ndot = dxs.y() * rvec.x() - dxs.x() * rvec.y();  // n(s).(x(t)-x(s))
          const double speed = dxs.norm();
          const cdouble L = -0.5 * I * kappa * ndot * h1 / r;
          const double L1 = kappa / (2.0 * pi) * ndot * b.j1 / r;
          const cdouble M = 0.5 * I * h0 * speed;
          const double M1 = -b.j0 * speed / (2.0 * pi);
          const cdouble K1 = L1 + I * eta * M1;
          const cdouble K2 = (L - L1 * lg) + I * eta * (M - M1 * lg);
          A(row, col) -= rw * K1 + w * K2;
        }
      }
    }
    if (!A.allFinite()) throw SolverError("non-finite Nystrom matrix");
    lu_ = Eigen::PartialPivLU<Eigen::MatrixXcd>(A);
    rcond_ = lu_.rcond();
    if (!(rcond_ > 1e-13)) throw SolverError("Nystrom system is numerically singular", rcond_);
  }

  ScatteringConfig cfg_;
  BoundaryNodes nodes_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double rcond_ = 0.0;
};

inline BoundaryDensity solve_density(const ParametricCurve& curve, const Point& d,
                                     const ScatteringConfig& cfg) {
  return NystromSolver(curve, cfg).solve(d);
}

inline Eigen::VectorXcd far_field(const BoundaryDensity& density, const ParametricCurve& curve,
                                  const Point& /*d*/, const ScatteringConfig& cfg,
                                  std::span<const double> obs_angles) {
  cfg.validate();
  return NystromSolver::far_field_from_nodes(BoundaryNodes(curve, cfg.n_quad), cfg, density,
                                             obs_angles);
}

/// Far-field pattern over obs_angles x inc_angles.
inline FarFieldPattern forward_map(const ParametricCurve& curve, const ScatteringConfig& cfg,
                                   std::span<const double> obs_angles,
                                   std::span<const double> inc_angles) {
  const NystromSolver solver(curve, cfg);
  FarFieldPattern out;
  out.obs_angles.assign(obs_angles.begin(), obs_angles.end());
  out.inc_angles.assign(inc_angles.begin(), inc_angles.end());
  out.values.resize(static_cast<Eigen::Index>(obs_angles.size()),
                    static_cast<Eigen::Index>(inc_angles.size()));
  for (std::size_t c = 0; c < inc_angles.size(); ++c) {
    const auto density = solver.solve(direction(inc_angles[c]));
    out.values.col(static_cast<Eigen::Index>(c)) = solver.far_field(density, obs_angles);
  }
  return out;
}

/// Separation-of-variables far field of the sound-soft circle of radius a
/// centered at the origin, in the same normalization as the Nystrom solver:
///   u_inf(phi) = 4i sum_n J_n(ka)/H_n(ka) exp(i n (phi - theta_d)).
inline Eigen::VectorXcd circle_far_field(double a, double kappa, double inc_angle,
                                         std::span<const double> obs_angles) {
  if (!(a > 0.0) || !(kappa > 0.0)) throw ConfigError("circle oracle needs a > 0 and kappa > 0");
  if (kappa * a > 100.0) throw ConfigError("circle oracle: kappa*a beyond the truncation bound");
  const double ka = kappa * a;
  std::vector<cdouble> ratio;
  for (int order = 0;; ++order) {
    if (order > 200) throw SolverError("circle oracle did not converge within 200 terms");
    const cdouble term = bessel(BesselKind::J, order, ka) / hankel1(order, ka);
    ratio.push_back(term);
    if (order > 0 && std::abs(term) < 1e-14) break;
  }
  Eigen::VectorXcd out(static_cast<Eigen::Index>(obs_angles.size()));
  for (std::size_t k = 0; k < obs_angles.size(); ++k) {
    const double delta = obs_angles[k] - inc_angle;
    cdouble sum = ratio[0];
    for (std::size_t m = 1; m < ratio.size(); ++m) sum += 2.0 * ratio[m] * std::cos(double(m) * delta);
    out[static_cast<Eigen::Index>(k)] = cdouble(0.0, 4.0) * sum;
  }
  return out;
}

}  // namespace scatter_bayes
