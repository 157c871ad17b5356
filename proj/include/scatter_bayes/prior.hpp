#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>

#include "scatter_bayes/errors.hpp"
#include "scatter_bayes/geometry.hpp"

namespace scatter_bayes {

/// Total-variation prior settings. `alpha` is the TV coupling strength; it is
/// unrelated to the acceptance probability of the sampler.
struct PriorConfig {
  double s = 2.2;
  double lambda = 0.2;
  double tv_alpha = 0.1;
  int m = 27;
  /// Use q = sum Z_k / lambda_k psi_k (true) or q = sum Z_k psi_k (false).
  bool divide_by_eigenvalue = true;

  static constexpr double kAlphaBound = 0.5;

  void validate() const {
    if (!(s > 0.5)) throw ConfigError("prior.s must exceed 1/2");
    if (!(lambda > 0.0)) throw ConfigError("prior.lambda must be positive");
    if (!(tv_alpha >= 0.0 && tv_alpha < kAlphaBound))
      throw ConfigError("prior.alpha must lie in [0, 0.5)");
    if (m < 1) throw ConfigError("prior.m must be at least 1");
  }
};

enum class CoefficientRole { ReferenceGaussian, Laplace, TvCoupled };

/// Coefficient vector tagged with its stage in the prior transform chain.
template <CoefficientRole Role>
struct Coefficients {
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  bool operator==(const Coefficients&) const = default;
};

using ReferenceCoefficients = Coefficients<CoefficientRole::ReferenceGaussian>;
using LaplaceCoefficients = Coefficients<CoefficientRole::Laplace>;
using CoupledCoefficients = Coefficients<CoefficientRole::TvCoupled>;

// ---------------------------------------------------------------------------
// Eigenbasis of the periodic fractional operator (-d^2/dtheta^2)^s

enum class BasisKind { Constant, Cos, Sin };

/// Orthonormal Fourier basis ordered 1/sqrt(2pi), cos t/sqrt(pi), sin t/sqrt(pi),
/// cos 2t/sqrt(pi), ... with eigenvalues k^(2s); the constant mode gets 1.
class Eigenbasis {
 public:
  Eigenbasis(int m, double s) {
    if (m < 1) throw ConfigError("eigenbasis needs m >= 1");
    for (int i = 0; i < m; ++i) {
      const int k = (i + 1) / 2;
      freq_.push_back(k);
      kind_.push_back(i == 0 ? BasisKind::Constant : (i % 2 == 1 ? BasisKind::Cos : BasisKind::Sin));
      eig_.push_back(k == 0 ? 1.0 : std::pow(static_cast<double>(k), 2.0 * s));
    }
  }

  int size() const { return static_cast<int>(eig_.size()); }
  double eigenvalue(int i) const { return eig_[i]; }
  const std::vector<double>& eigenvalues() const { return eig_; }
  int frequency(int i) const { return freq_[i]; }
  BasisKind kind(int i) const { return kind_[i]; }
  int max_frequency() const { return freq_.back(); }

  double operator()(int i, double theta) const {
    static const double c0 = 1.0 / std::sqrt(kTwoPi);
    static const double c1 = 1.0 / std::sqrt(std::numbers::pi);
    switch (kind_[i]) {
      case BasisKind::Constant: return c0;
      case BasisKind::Cos: return c1 * std::cos(freq_[i] * theta);
      case BasisKind::Sin: return c1 * std::sin(freq_[i] * theta);
    }
    return 0.0;
  }

 private:
  std::vector<double> eig_;
  std::vector<int> freq_;
  std::vector<BasisKind> kind_;
};

inline Eigenbasis eigenbasis(const PriorConfig& cfg) { return Eigenbasis(cfg.m, cfg.s); }

// ---------------------------------------------------------------------------
// Gaussian reference -> Laplace marginal

namespace detail {

// log(erfc(x)) for x >= 0, switching to the asymptotic series before erfc underflows.
inline double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  const double x2 = x * x, inv = 1.0 / (2.0 * x2);
  const double series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv * inv * inv;
  return -x2 - std::log(x * std::sqrt(std::numbers::pi)) + std::log(series);
}

}  // namespace detail

/// Standard normal cdf.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Laplace(0, 1/rate) cdf.
inline double laplace_cdf(double x, double rate) {
  return x < 0 ? 0.5 * std::exp(rate * x) : 1.0 - 0.5 * std::exp(-rate * x);
}

/// g(b) = -(1/lambda) sign(b) log(1 - |2 G(b) - 1|), written through erfc so
/// neither tail cancels: 1 - |2 G(b) - 1| = erfc(|b| / sqrt 2).
inline double gauss_to_laplace(double b, double rate) {
  if (b == 0.0) return 0.0;
  const double mag = -detail::log_erfc(std::abs(b) / std::numbers::sqrt2) / rate;
  return b < 0 ? -mag : mag;
}

/// Inverse of gauss_to_laplace.
inline double laplace_to_gauss(double a, double rate) {
  if (a == 0.0) return 0.0;
  const double target = -rate * std::abs(a);  // log erfc(x) = target
  double x;
  if (target > -700.0) {
    x = boost::math::erfc_inv(std::exp(target));
  } else {
    x = std::sqrt(-target);
    for (int it = 0; it < 50; ++it) {
      // d/dx log erfc(x) ~ -2x (1 + 1/(2x^2))^-1 in the far tail
      const double f = detail::log_erfc(x) - target;
      const double df = -2.0 * x / (1.0 - 1.0 / (2.0 * x * x));
      const double step = f / df;
      x -= step;
      if (std::abs(step) < 1e-15 * x) break;
    }
  }
  const double b = std::numbers::sqrt2 * x;
  return a < 0 ? -b : b;
}

// ---------------------------------------------------------------------------
// TV coupling D = I + alpha D0

/// Cyclic first-difference matrix
///   [ 1          1 ]
///   [-1  1         ]
///   [    ...  ...  ]
///   [       -1   1 ]
inline Eigen::MatrixXd cyclic_difference(int m) {
  Eigen::MatrixXd d0 = Eigen::MatrixXd::Identity(m, m);
  d0(0, m - 1) += 1.0;
  for (int i = 1; i < m; ++i) d0(i, i - 1) = -1.0;
  return d0;
}

class TVTransform {
 public:
  TVTransform(int m, double tv_alpha)
      : d_(Eigen::MatrixXd::Identity(m, m) + tv_alpha * cyclic_difference(m)),
        d_inv_(d_.partialPivLu().inverse()),
        tv_alpha_(tv_alpha) {}

  const Eigen::MatrixXd& matrix() const { return d_; }
  const Eigen::MatrixXd& inverse() const { return d_inv_; }
  double tv_alpha() const { return tv_alpha_; }
  int size() const { return static_cast<int>(d_.rows()); }

  /// |D z|_1, the l1-type norm appearing in the prior density.
  double tv_norm(const Eigen::VectorXd& z) const { return (d_ * z).lpNorm<1>(); }

 private:
  Eigen::MatrixXd d_;
  Eigen::MatrixXd d_inv_;
  double tv_alpha_;
};

inline LaplaceCoefficients laplace_coefficients(const ReferenceCoefficients& b, double rate) {
  LaplaceCoefficients a{Eigen::VectorXd(b.size())};
  for (Eigen::Index i = 0; i < b.size(); ++i) a.values[i] = gauss_to_laplace(b.values[i], rate);
  return a;
}

/// Z_q = D^{-1} A(B).
inline CoupledCoefficients tv_couple(const ReferenceCoefficients& b, const PriorConfig& cfg,
                                     const TVTransform& tv) {
  if (b.size() != tv.size()) throw ConfigError("coefficient count does not match the TV transform");
  return {tv.inverse() * laplace_coefficients(b, cfg.lambda).values};
}

/// B = A^{-1}(D Z_q).
inline ReferenceCoefficients tv_decouple(const CoupledCoefficients& z, const PriorConfig& cfg,
                                         const TVTransform& tv) {
  const Eigen::VectorXd a = tv.matrix() * z.values;
  ReferenceCoefficients b{Eigen::VectorXd(a.size())};
  for (Eigen::Index i = 0; i < a.size(); ++i) b.values[i] = laplace_to_gauss(a[i], cfg.lambda);
  return b;
}

// ---------------------------------------------------------------------------
// Coefficients <-> log-radius

/// q(theta) = sum_k (Z_k / lambda_k) psi_k(theta), or without the division.
inline TrigSeries coeffs_to_logradius(const Eigen::VectorXd& z, const Eigenbasis& basis,
                                      bool divide_by_eigenvalue = true) {
  if (z.size() != basis.size()) throw ConfigError("coefficient count does not match the basis");
  const double c0 = 1.0 / std::sqrt(kTwoPi);
  const double c1 = 1.0 / std::sqrt(std::numbers::pi);
  const int kmax = basis.max_frequency();
  double constant = 0.0;
  std::vector<double> cs(kmax, 0.0), sn(kmax, 0.0);
  for (int i = 0; i < basis.size(); ++i) {
    const double coef = divide_by_eigenvalue ? z[i] / basis.eigenvalue(i) : z[i];
    switch (basis.kind(i)) {
      case BasisKind::Constant: constant = coef * c0; break;
      case BasisKind::Cos: cs[basis.frequency(i) - 1] = coef * c1; break;
      case BasisKind::Sin: sn[basis.frequency(i) - 1] = coef * c1; break;
    }
  }
  return {constant, std::move(cs), std::move(sn)};
}

template <CoefficientRole Role>
TrigSeries coeffs_to_logradius(const Coefficients<Role>& z, const Eigenbasis& basis,
                               bool divide_by_eigenvalue = true) {
  return coeffs_to_logradius(z.values, basis, divide_by_eigenvalue);
}

/// Coefficients whose expansion is the L2 projection of q onto the basis
/// (trapezoid rule with n points); inverse of coeffs_to_logradius on the span.
inline Eigen::VectorXd project_logradius(const std::function<double(double)>& q,
                                         const Eigenbasis& basis, bool divide_by_eigenvalue = true,
                                         int n = 4096) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(basis.size());
  for (int j = 0; j < n; ++j) {
    const double th = kTwoPi * j / n;
    const double v = q(th);
    for (int i = 0; i < basis.size(); ++i) z[i] += v * basis(i, th);
  }
  z *= kTwoPi / n;
  if (divide_by_eigenvalue)
    for (int i = 0; i < basis.size(); ++i) z[i] *= basis.eigenvalue(i);
  return z;
}

// ---------------------------------------------------------------------------
// The full prior

/// Eigenbasis, TV transform and settings bundled; immutable and shareable.
class ShapePrior {
 public:
  explicit ShapePrior(const PriorConfig& cfg)
      : cfg_((cfg.validate(), cfg)), basis_(cfg.m, cfg.s), tv_(cfg.m, cfg.tv_alpha) {}

  const PriorConfig& config() const { return cfg_; }
  const Eigenbasis& basis() const { return basis_; }
  const TVTransform& tv() const { return tv_; }
  int dimension() const { return cfg_.m; }

  CoupledCoefficients couple(const ReferenceCoefficients& b) const { return tv_couple(b, cfg_, tv_); }
  ReferenceCoefficients decouple(const CoupledCoefficients& z) const {
    return tv_decouple(z, cfg_, tv_);
  }
  TrigSeries log_radius(const CoupledCoefficients& z) const {
    return coeffs_to_logradius(z, basis_, cfg_.divide_by_eigenvalue);
  }
  TrigSeries log_radius(const ReferenceCoefficients& b) const { return log_radius(couple(b)); }

 private:
  PriorConfig cfg_;
  Eigenbasis basis_;
  TVTransform tv_;
};

struct PriorSample {
  ReferenceCoefficients b;
  CoupledCoefficients z;
  TrigSeries log_radius;
};

inline ReferenceCoefficients standard_normal_vector(std::mt19937_64& rng, int m) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ReferenceCoefficients b{Eigen::VectorXd(m)};
  for (int i = 0; i < m; ++i) b.values[i] = normal(rng);
  return b;
}

inline PriorSample prior_sample(std::mt19937_64& rng, const ShapePrior& prior) {
  auto b = standard_normal_vector(rng, prior.dimension());
  auto z = prior.couple(b);
  auto q = prior.log_radius(z);
  return {std::move(b), std::move(z), std::move(q)};
}

/// Star-shaped curve whose log-radius is the basis expansion of `z`.
inline StarShapedCurve star_curve(const Point& center, const Eigen::VectorXd& z,
                                  const Eigenbasis& basis, bool divide_by_eigenvalue = true,
                                  double r_max = kDefaultRMax) {
  return StarShapedCurve(center, coeffs_to_logradius(z, basis, divide_by_eigenvalue), r_max);
}

}  // namespace scatter_bayes
