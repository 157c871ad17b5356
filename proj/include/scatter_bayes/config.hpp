#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scatter_bayes/data.hpp"
#include "scatter_bayes/errors.hpp"
#include "scatter_bayes/forward.hpp"
#include "scatter_bayes/geometry.hpp"
#include "scatter_bayes/prior.hpp"
#include "scatter_bayes/sampler.hpp"

namespace scatter_bayes {

struct ForwardSettings {
  int n_quad_data = kDataQuadrature;
  int n_quad_inversion = 64;
  double r_max = kDefaultRMax;
  /// Relative noise level used for sigma when the data file carries sigma = 0.
  double sigma_fallback = 0.01;
};

struct ExperimentConfig {
  std::string shape = "kite";
  double kappa = 1.0;
  Point true_center = Point::Zero();
  Point assumed_center = Point::Zero();
  ApertureConfig apertures;
  NoiseConfig noise;
  PriorConfig prior;
  ChainConfig chain;
  int chains = 1;
  ForwardSettings forward;
  std::filesystem::path output_dir = "out";

  void validate() const {
    catalog_entry(shape);
    if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
    apertures.validate();
    noise.validate();
    prior.validate();
    chain.validate();
    if (chains < 1) throw ConfigError("chains must be at least 1");
    data_scattering().validate();
    inversion_scattering().validate();
    if (!(forward.r_max > 0.0)) throw ConfigError("forward.r_max must be positive");
    if (!(forward.sigma_fallback > 0.0)) throw ConfigError("forward.sigma_fallback must be positive");
    if (output_dir.empty()) throw ConfigError("output_dir is empty");
  }

  ScatteringConfig data_scattering() const { return {kappa, forward.n_quad_data, std::nullopt}; }
  ScatteringConfig inversion_scattering() const {
    return {kappa, forward.n_quad_inversion, std::nullopt};
  }
  ParametricCurve truth_curve() const { return catalog_shape(shape).translated(true_center); }
};

inline std::string to_string(ChainInit init) {
  switch (init) {
    case ChainInit::Zero: return "zero";
    case ChainInit::PriorDraw: return "prior_draw";
    case ChainInit::Optimized: return "optimized";
  }
  return "?";
}

inline ChainInit parse_chain_init(const std::string& s) {
  if (s == "zero") return ChainInit::Zero;
  if (s == "prior_draw") return ChainInit::PriorDraw;
  if (s == "optimized") return ChainInit::Optimized;
  throw ConfigError("unknown chain.init '" + s + "' (expected zero, prior_draw or optimized)");
}

namespace detail {

using nlohmann::json;

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  void point(const char* key, Point& out) {
    std::vector<double> v{out.x(), out.y()};
    get(key, v);
    if (v.size() != 2) throw ConfigError(where(key) + " must be [x, y]");
    out = Point(v[0], v[1]);
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + where(it.key()) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace detail

/// Strict parse: unknown keys and mistyped values are ConfigErrors; absent
/// keys keep their defaults.
inline ExperimentConfig parse_config(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  detail::ObjectReader top(root, "");
  top.get("shape", cfg.shape);
  top.get("kappa", cfg.kappa);
  top.point("true_center", cfg.true_center);
  top.point("assumed_center", cfg.assumed_center);
  top.get("chains", cfg.chains);
  std::string out = cfg.output_dir.string();
  top.get("output_dir", out);
  cfg.output_dir = out;

  if (const auto* j = top.child("apertures")) {
    detail::ObjectReader r(*j, "apertures");
    std::string obs = to_string(cfg.apertures.obs_kind), inc = to_string(cfg.apertures.inc_kind);
    r.get("observation", obs);
    r.get("incident", inc);
    cfg.apertures.obs_kind = parse_observation_kind(obs);
    cfg.apertures.inc_kind = parse_incident_kind(inc);
    r.get("observation_from", cfg.apertures.obs_from);
    r.get("observation_to", cfg.apertures.obs_to);
    r.get("observation_spacing", cfg.apertures.obs_spacing);
    r.get("incident_angles", cfg.apertures.inc_custom);
    r.finish();
  }
  if (const auto* j = top.child("noise")) {
    detail::ObjectReader r(*j, "noise");
    r.get("eta1", cfg.noise.eta1);
    r.get("eta2", cfg.noise.eta2);
    r.get("seed", cfg.noise.seed);
    r.finish();
  }
  if (const auto* j = top.child("prior")) {
    detail::ObjectReader r(*j, "prior");
    r.get("s", cfg.prior.s);
    r.get("lambda", cfg.prior.lambda);
    r.get("tv_alpha", cfg.prior.tv_alpha);
    r.get("m", cfg.prior.m);
    r.get("divide_by_eigenvalue", cfg.prior.divide_by_eigenvalue);
    r.finish();
  }
  if (const auto* j = top.child("chain")) {
    detail::ObjectReader r(*j, "chain");
    auto& c = cfg.chain;
    r.get("beta", c.beta);
    r.get("n_total", c.n_total);
    r.get("burn_in", c.burn_in);
    r.get("seed", c.seed);
    r.get("thin", c.thin);
    std::string init = to_string(c.init);
    r.get("init", init);
    c.init = parse_chain_init(init);
    r.get("audit_every", c.audit_every);
    r.get("adapt_beta", c.adapt_beta);
    r.get("target_acceptance", c.target_acceptance);
    r.get("adapt_window", c.adapt_window);
    r.get("max_retries", c.max_retries);
    r.get("theta_grid", c.theta_grid);
    r.get("band_lower", c.band_lower);
    r.get("band_upper", c.band_upper);
    r.finish();
  }
  if (const auto* j = top.child("forward")) {
    detail::ObjectReader r(*j, "forward");
    r.get("n_quad_data", cfg.forward.n_quad_data);
    r.get("n_quad_inversion", cfg.forward.n_quad_inversion);
    r.get("r_max", cfg.forward.r_max);
    r.get("sigma_fallback", cfg.forward.sigma_fallback);
    r.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// Full config as JSON, every key explicit.
inline std::string dump_config(const ExperimentConfig& cfg) {
  using detail::json;
  json j;
  j["shape"] = cfg.shape;
  j["kappa"] = cfg.kappa;
  j["true_center"] = {cfg.true_center.x(), cfg.true_center.y()};
  j["assumed_center"] = {cfg.assumed_center.x(), cfg.assumed_center.y()};
  j["chains"] = cfg.chains;
  j["output_dir"] = cfg.output_dir.string();
  json ap;
  ap["observation"] = to_string(cfg.apertures.obs_kind);
  ap["incident"] = to_string(cfg.apertures.inc_kind);
  ap["observation_spacing"] = cfg.apertures.obs_spacing;
  if (cfg.apertures.obs_kind == ObservationKind::Custom) {
    ap["observation_from"] = cfg.apertures.obs_from;
    ap["observation_to"] = cfg.apertures.obs_to;
  }
  if (cfg.apertures.inc_kind == IncidentKind::Custom) ap["incident_angles"] = cfg.apertures.inc_custom;
  j["apertures"] = ap;
  j["noise"] = {{"eta1", cfg.noise.eta1}, {"eta2", cfg.noise.eta2}, {"seed", cfg.noise.seed}};
  j["prior"] = {{"s", cfg.prior.s},
                {"lambda", cfg.prior.lambda},
                {"tv_alpha", cfg.prior.tv_alpha},
                {"m", cfg.prior.m},
                {"divide_by_eigenvalue", cfg.prior.divide_by_eigenvalue}};
  const auto& c = cfg.chain;
  j["chain"] = {{"beta", c.beta},
                {"n_total", c.n_total},
                {"burn_in", c.burn_in},
                {"seed", c.seed},
                {"thin", c.thin},
                {"init", to_string(c.init)},
                {"audit_every", c.audit_every},
                {"adapt_beta", c.adapt_beta},
                {"target_acceptance", c.target_acceptance},
                {"adapt_window", c.adapt_window},
                {"max_retries", c.max_retries},
                {"theta_grid", c.theta_grid},
                {"band_lower", c.band_lower},
                {"band_upper", c.band_upper}};
  j["forward"] = {{"n_quad_data", cfg.forward.n_quad_data},
                  {"n_quad_inversion", cfg.forward.n_quad_inversion},
                  {"r_max", cfg.forward.r_max},
                  {"sigma_fallback", cfg.forward.sigma_fallback}};
  return j.dump(2) + "\n";
}

}  // namespace scatter_bayes
