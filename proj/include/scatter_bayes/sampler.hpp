#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "scatter_bayes/data.hpp"
#include "scatter_bayes/errors.hpp"
#include "scatter_bayes/forward.hpp"
#include "scatter_bayes/geometry.hpp"
#include "scatter_bayes/prior.hpp"

namespace scatter_bayes {

enum class ChainInit { Zero, PriorDraw, Optimized };

struct ChainConfig {
  double beta = 0.1;
  int n_total = 11000;
  int burn_in = 1000;
  std::uint64_t seed = 1;
  int thin = 1;
  ChainInit init = ChainInit::Zero;
  /// Recompute the cached potential every this many steps and compare (0 disables).
  int audit_every = 1000;
  /// Tune beta toward `target_acceptance` during burn-in only; the kernel is
  /// fixed once samples are retained.
  bool adapt_beta = false;
  double target_acceptance = 0.25;
  int adapt_window = 50;
  /// Solver failures tolerated per step before the chain aborts.
  int max_retries = 3;
  /// Posterior summaries: theta grid size and pointwise band quantiles.
  int theta_grid = 256;
  double band_lower = 0.05;
  double band_upper = 0.95;

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("chain.beta must lie in (0, 1)");
    if (n_total < 1) throw ConfigError("chain.n_total must be positive");
    if (burn_in < 0 || burn_in >= n_total) throw ConfigError("chain.burn_in must be in [0, n_total)");
    if (thin < 1) throw ConfigError("chain.thin must be at least 1");
    if (theta_grid < 16) throw ConfigError("chain.theta_grid must be at least 16");
    if (!(band_lower >= 0.0 && band_lower < band_upper && band_upper <= 1.0))
      throw ConfigError("chain band quantiles must satisfy 0 <= lower < upper <= 1");
  }
};

struct ChainState {
  ReferenceCoefficients b;
  CoupledCoefficients z;
  double phi = 0.0;
};

// ---------------------------------------------------------------------------
// Potential

/// sum |F - y|^2 / (2 sigma^2) over all entries (real and imaginary residuals).
inline double residual_potential(const Eigen::MatrixXcd& predicted, const Eigen::MatrixXcd& observed,
                                 double sigma) {
  if (predicted.rows() != observed.rows() || predicted.cols() != observed.cols())
    throw ConfigError("predicted and observed far fields differ in shape");
  return (predicted - observed).squaredNorm() / (2.0 * sigma * sigma);
}

/// Phi(q) = ||F(q) - y||^2 / (2 sigma^2) for the star-shaped boundary with
/// log-radius q about a fixed center. Inadmissible shapes give +inf.
class LikelihoodPotential {
 public:
  LikelihoodPotential(ObservationSet data, ScatteringConfig cfg, Point center,
                      double r_max = kDefaultRMax, double sigma_fallback = 0.01)
      : data_(std::move(data)), cfg_(cfg), center_(std::move(center)), r_max_(r_max) {
    cfg_.kappa = data_.kappa;
    cfg_.validate();
    sigma_ = data_.sigma > 0.0 ? data_.sigma : sigma_fallback * data_.y.values.cwiseAbs().maxCoeff();
    if (!(sigma_ > 0.0)) throw ConfigError("noise scale sigma must be positive");
  }

  double sigma() const { return sigma_; }
  const ObservationSet& data() const { return data_; }
  const ScatteringConfig& config() const { return cfg_; }
  const Point& center() const { return center_; }

  double operator()(const TrigSeries& log_radius) const {
    const StarShapedCurve shape(center_, log_radius, r_max_);
    try {
      shape.validate(std::max(256, cfg_.n_quad));
    } catch (const InvalidShapeError&) {
      return std::numeric_limits<double>::infinity();
    }
    const auto f = forward_map(shape.curve(), cfg_, data_.y.obs_angles, data_.y.inc_angles);
    return residual_potential(f.values, data_.y.values, sigma_);
  }

  /// Whitened residuals (F - y) / sigma, real and imaginary parts interleaved;
  /// empty for an inadmissible shape. Phi is half the squared norm.
  Eigen::VectorXd residuals(const TrigSeries& log_radius) const {
    const StarShapedCurve shape(center_, log_radius, r_max_);
    try {
      shape.validate(std::max(256, cfg_.n_quad));
    } catch (const InvalidShapeError&) {
      return {};
    }
    const auto f = forward_map(shape.curve(), cfg_, data_.y.obs_angles, data_.y.inc_angles);
    const Eigen::MatrixXcd d = (f.values - data_.y.values) / sigma_;
    Eigen::VectorXd r(2 * d.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
      r[2 * k] = d(k).real();
      r[2 * k + 1] = d(k).imag();
    }
    return r;
  }

  Eigen::Index residual_count() const { return 2 * data_.y.values.size(); }

 private:
  ObservationSet data_;
  ScatteringConfig cfg_;
  Point center_;
  double r_max_;
  double sigma_ = 1.0;
};

/// Phi == 0: the chain samples the prior.
struct ZeroPotential {
  double operator()(const TrigSeries&) const { return 0.0; }
};

// ---------------------------------------------------------------------------
// Warm start

namespace detail {

// Negative log-posterior in reference coordinates is the least-squares cost
// 1/2 ||[r(B); B]||^2. Only the coordinates listed in `active` vary.
struct PosteriorResiduals {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const LikelihoodPotential* potential;
  const ShapePrior* prior;
  std::vector<int> active;
  Eigen::VectorXd base;
  static constexpr double kInadmissible = 1e3;

  int inputs() const { return static_cast<int>(active.size()); }
  int values() const { return static_cast<int>(potential->residual_count() + prior->dimension()); }

  Eigen::VectorXd full(const Eigen::VectorXd& x) const {
    Eigen::VectorXd b = base;
    for (std::size_t i = 0; i < active.size(); ++i) b[active[i]] = x[static_cast<Eigen::Index>(i)];
    return b;
  }

  bool eval(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    const Eigen::VectorXd b = full(x);
    const auto data = potential->residuals(prior->log_radius(ReferenceCoefficients{b}));
    r.resize(values());
    if (data.size() == 0) {
      r.setConstant(kInadmissible);
      return false;
    }
    r << data, b;
    return true;
  }

  bool admissible(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    try {
      return eval(x, r);
    } catch (const SolverError&) {
      r.setConstant(kInadmissible);
      return false;
    }
  }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    admissible(x, r);
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    Eigen::VectorXd r0, r1;
    (*this)(x, r0);
    jac.resize(values(), inputs());
    for (int j = 0; j < inputs(); ++j) {
      Eigen::VectorXd xp = x;
      double h = 1e-6 * std::max(1.0, std::abs(x[j]));
      xp[j] += h;
      if (!admissible(xp, r1)) {
        xp[j] = x[j] - h;
        h = -h;
        admissible(xp, r1);
      }
      jac.col(j) = (r1 - r0) / h;
    }
    return 0;
  }

  double cost(const Eigen::VectorXd& b) {
    base = b;
    active.clear();
    Eigen::VectorXd r;
    (*this)(Eigen::VectorXd::Zero(0), r);
    return 0.5 * r.squaredNorm();
  }
};

}  // namespace detail

struct WarmStartResult {
  ReferenceCoefficients b;
  double cost = 0.0;  // Phi + |B|^2 / 2
  int evaluations = 0;
};

/// Approximate posterior mode in reference coordinates by Levenberg-Marquardt.
/// Two schedules are tried from the prior mode, all modes at once and modes
/// released in order of frequency, and the lower cost wins.
inline WarmStartResult map_estimate(const LikelihoodPotential& potential, const ShapePrior& prior,
                                    int max_evaluations = 100) {
  const int m = prior.dimension();
  const int kmax = prior.basis().max_frequency();
  // The reference-to-coupled map has a kink at 0; start just off it.
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(m, 1e-3);
  WarmStartResult best{ReferenceCoefficients{start}, std::numeric_limits<double>::infinity(), 0};
  int evaluations = 0;
  for (int schedule = 0; schedule < 2; ++schedule) {
    detail::PosteriorResiduals f{&potential, &prior, {}, start};
    for (int k = schedule == 0 ? kmax : 0; k <= kmax; ++k) {
      f.active.clear();
      for (int i = 0; i < m; ++i)
        if (prior.basis().frequency(i) <= k) f.active.push_back(i);
      Eigen::VectorXd x(f.active.size());
      for (std::size_t i = 0; i < f.active.size(); ++i) x[static_cast<Eigen::Index>(i)] = f.base[f.active[i]];
      Eigen::LevenbergMarquardt<detail::PosteriorResiduals> lm(f);
      lm.parameters.maxfev = max_evaluations;
      lm.minimize(x);
      evaluations += static_cast<int>(lm.nfev + lm.njev * f.inputs());
      f.base = f.full(x);
    }
    const Eigen::VectorXd b = f.base;
    const double c = f.cost(b);
    if (c < best.cost) best = {ReferenceCoefficients{b}, c, 0};
  }
  best.evaluations = evaluations;
  return best;
}

template <class Potential>
ChainState make_state(const ReferenceCoefficients& b, const Potential& potential,
                      const ShapePrior& prior) {
  ChainState s{b, prior.couple(b), 0.0};
  s.phi = potential(prior.log_radius(s.z));
  return s;
}

// ---------------------------------------------------------------------------
// pCN kernel

struct StepResult {
  ChainState state;
  bool accepted = false;
};

/// One preconditioned Crank-Nicolson step. The uniform for the accept test is
/// drawn on every step so the rng stream does not depend on the outcome.
template <class Potential>
StepResult pcn_step(const ChainState& current, const Potential& potential, const ShapePrior& prior,
                    const ChainConfig& cfg, std::mt19937_64& rng) {
  const auto xi = standard_normal_vector(rng, prior.dimension());
  ReferenceCoefficients proposal{std::sqrt(1.0 - cfg.beta * cfg.beta) * current.b.values +
                                 cfg.beta * xi.values};
  auto z = prior.couple(proposal);
  const double phi = potential(prior.log_radius(z));

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double coin = uniform(rng);
  const double acceptance_prob = std::isfinite(phi) ? std::min(1.0, std::exp(current.phi - phi)) : 0.0;
  if (std::isfinite(phi) && coin <= acceptance_prob)
    return {ChainState{std::move(proposal), std::move(z), phi}, true};
  return {current, false};
}

// ---------------------------------------------------------------------------
// Chains and summaries

struct ChainSample {
  int iteration = 0;
  ReferenceCoefficients b;
  double phi = 0.0;
};

struct PosteriorSummary {
  Eigen::VectorXd mean_coefficients;  // mean of Z_q
  Eigen::VectorXd mean_reference;     // mean of B
  std::vector<double> theta;
  std::vector<double> mean_log_radius;
  std::vector<double> mean_radius;  // exp(mean log-radius)
  std::vector<double> radius_low;
  std::vector<double> radius_high;
  std::vector<Point> mean_boundary;
  Point center = Point::Zero();
  double acceptance_rate = 0.0;
  int n_samples = 0;
};

struct ChainResult {
  std::vector<ChainSample> samples;
  std::vector<double> phi_trace;  // Phi after every step
  long accepted = 0;
  long steps = 0;
  std::uint64_t seed = 0;
  double final_beta = 0.0;

  double acceptance_rate() const { return steps > 0 ? double(accepted) / double(steps) : 0.0; }
};

/// Linear-interpolation quantile of an unsorted sample (sorted in place).
inline double quantile(std::vector<double>& v, double p) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v.front();
  const double h = p * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

/// Summaries over the retained samples of one or more chains. The mean is
/// taken in log-radius space, which equals the expansion of the mean Z_q.
inline PosteriorSummary summarize(const std::vector<const ChainResult*>& chains,
                                  const ShapePrior& prior, const Point& center,
                                  const ChainConfig& cfg) {
  PosteriorSummary out;
  out.center = center;
  const int m = prior.dimension();
  out.mean_coefficients = Eigen::VectorXd::Zero(m);
  out.mean_reference = Eigen::VectorXd::Zero(m);
  long accepted = 0, steps = 0;
  std::vector<const ChainSample*> all;
  for (const auto* c : chains) {
    accepted += c->accepted;
    steps += c->steps;
    for (const auto& s : c->samples) all.push_back(&s);
  }
  if (all.empty()) throw ChainAbort("no retained samples to summarize");
  out.n_samples = static_cast<int>(all.size());
  out.acceptance_rate = steps > 0 ? double(accepted) / double(steps) : 0.0;

  const int n_theta = cfg.theta_grid;
  out.theta.resize(n_theta);
  for (int k = 0; k < n_theta; ++k) out.theta[k] = kTwoPi * k / n_theta;
  std::vector<std::vector<double>> q_at(n_theta, std::vector<double>(all.size()));
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto z = prior.couple(all[i]->b);
    out.mean_coefficients += z.values;
    out.mean_reference += all[i]->b.values;
    const auto q = prior.log_radius(z);
    for (int k = 0; k < n_theta; ++k) q_at[k][i] = q(out.theta[k]);
  }
  out.mean_coefficients /= double(all.size());
  out.mean_reference /= double(all.size());

  out.mean_log_radius.resize(n_theta);
  out.mean_radius.resize(n_theta);
  out.radius_low.resize(n_theta);
  out.radius_high.resize(n_theta);
  out.mean_boundary.resize(n_theta);
  for (int k = 0; k < n_theta; ++k) {
    auto& col = q_at[k];
    double sum = 0.0;
    for (double v : col) sum += v;
    out.mean_log_radius[k] = sum / double(col.size());
    out.mean_radius[k] = std::exp(out.mean_log_radius[k]);
    // exp is monotone, so quantiles of r are exp of quantiles of q.
    out.radius_low[k] = std::exp(quantile(col, cfg.band_lower));
    out.radius_high[k] = std::exp(quantile(col, cfg.band_upper));
    out.mean_boundary[k] = center + out.mean_radius[k] * direction(out.theta[k]);
  }
  return out;
}

inline ReferenceCoefficients initial_state(const ShapePrior& prior, const ChainConfig& cfg,
                                           std::mt19937_64& rng) {
  if (cfg.init == ChainInit::PriorDraw) return standard_normal_vector(rng, prior.dimension());
  if (cfg.init == ChainInit::Optimized)
    throw ConfigError("chain.init = optimized needs a likelihood potential");
  return {Eigen::VectorXd::Zero(prior.dimension())};
}

/// As above; an Optimized start uses the potential's data and ignores `rng`.
template <class Potential>
ReferenceCoefficients initial_state(const Potential& potential, const ShapePrior& prior,
                                    const ChainConfig& cfg, std::mt19937_64& rng) {
  if constexpr (std::is_same_v<Potential, LikelihoodPotential>) {
    if (cfg.init == ChainInit::Optimized) return map_estimate(potential, prior).b;
  } else {
    if (cfg.init == ChainInit::Optimized) return {Eigen::VectorXd::Zero(prior.dimension())};
  }
  return initial_state(prior, cfg, rng);
}

/// Runs n_total pCN steps from `init`, keeping every thin-th state after burn-in.
template <class Potential>
ChainResult run_chain(const ReferenceCoefficients& init, const Potential& potential,
                      const ShapePrior& prior, const ChainConfig& cfg) {
  cfg.validate();
  if (init.size() != prior.dimension()) throw ConfigError("initial state has the wrong dimension");
  std::mt19937_64 rng(cfg.seed);
  ChainResult out;
  out.seed = cfg.seed;
  ChainState state;
  try {
    state = make_state(init, potential, prior);
  } catch (const SolverError& e) {
    throw ChainAbort(std::string("forward solve failed at the initial state: ") + e.what());
  }
  if (!std::isfinite(state.phi)) throw ChainAbort("initial state has infinite potential");
  out.phi_trace.reserve(static_cast<std::size_t>(cfg.n_total));
  out.samples.reserve(static_cast<std::size_t>((cfg.n_total - cfg.burn_in) / cfg.thin + 1));

  ChainConfig kernel = cfg;
  int window_accepted = 0;
  for (int j = 1; j <= cfg.n_total; ++j) {
    StepResult step;
    for (int attempt = 0;; ++attempt) {
      try {
        step = pcn_step(state, potential, prior, kernel, rng);
        break;
      } catch (const SolverError& e) {
        if (attempt + 1 >= cfg.max_retries)
          throw ChainAbort("forward solve failed " + std::to_string(cfg.max_retries) +
                           " times at iteration " + std::to_string(j) + ": " + e.what() +
                           " (rcond " + std::to_string(e.rcond()) + ")");
      }
    }
    state = std::move(step.state);
    out.accepted += step.accepted ? 1 : 0;
    ++out.steps;
    out.phi_trace.push_back(state.phi);

    if (cfg.adapt_beta && j <= cfg.burn_in) {
      window_accepted += step.accepted ? 1 : 0;
      if (j % cfg.adapt_window == 0) {
        const double rate = double(window_accepted) / cfg.adapt_window;
        kernel.beta = std::clamp(kernel.beta * std::exp(2.0 * (rate - cfg.target_acceptance)),
                                 1e-6, 0.99);
        window_accepted = 0;
      }
    }

    if (cfg.audit_every > 0 && j % cfg.audit_every == 0) {
      const double fresh = potential(prior.log_radius(prior.couple(state.b)));
      const double tol = 1e-10 * std::max(1.0, std::abs(fresh));
      if (!(std::abs(fresh - state.phi) <= tol))
        throw ChainAbort("cached potential drifted from a fresh evaluation at iteration " +
                         std::to_string(j));
    }
    if (j > cfg.burn_in && (j - cfg.burn_in) % cfg.thin == 0)
      out.samples.push_back({j, state.b, state.phi});
  }
  out.final_beta = kernel.beta;
  return out;
}

/// Boundary of the posterior mean (mean log-radius about `center`).
inline ParametricCurve posterior_mean_curve(const PosteriorSummary& summary, const ShapePrior& prior,
                                            const Point& center) {
  if (summary.n_samples <= 0) throw ChainAbort("empty posterior summary");
  return StarShapedCurve(center, prior.log_radius(CoupledCoefficients{summary.mean_coefficients}))
      .curve();
}

/// Worker count: hardware threads capped by SCATTER_BAYES_THREADS when set.
inline int worker_count() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("SCATTER_BAYES_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

/// Independent chains with seeds seed, seed+1, ...; run concurrently up to
/// worker_count() at a time. Results are ordered by chain index. A `shared`
/// start, when given, replaces the configured initial state for every chain.
template <class Potential>
std::vector<ChainResult> run_chains(int n_chains, const Potential& potential, const ShapePrior& prior,
                                    const ChainConfig& cfg,
                                    std::optional<ReferenceCoefficients> shared = std::nullopt) {
  if (n_chains < 1) throw ConfigError("need at least one chain");
  std::vector<ChainResult> results(static_cast<std::size_t>(n_chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));
  // The optimized start is deterministic, so all chains share one.
  if (!shared && cfg.init == ChainInit::Optimized) {
    std::mt19937_64 unused(cfg.seed);
    shared = initial_state(potential, prior, cfg, unused);
  }
  auto work = [&](int c) {
    try {
      ChainConfig local = cfg;
      local.seed = cfg.seed + static_cast<std::uint64_t>(c);
      std::mt19937_64 init_rng(local.seed ^ 0x9e3779b97f4a7c15ULL);
      const auto init = shared ? *shared : initial_state(potential, prior, local, init_rng);
      results[c] = run_chain(init, potential, prior, local);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const int workers = std::min(worker_count(), n_chains);
  for (int start = 0; start < n_chains; start += workers) {
    std::vector<std::thread> pool;
    for (int c = start; c < std::min(n_chains, start + workers); ++c) pool.emplace_back(work, c);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace scatter_bayes
