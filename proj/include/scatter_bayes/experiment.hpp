#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "scatter_bayes/config.hpp"
#include "scatter_bayes/data.hpp"
#include "scatter_bayes/errors.hpp"
#include "scatter_bayes/geometry.hpp"
#include "scatter_bayes/prior.hpp"
#include "scatter_bayes/sampler.hpp"

namespace scatter_bayes {

inline ObservationSet simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  return make_observations(cfg.truth_curve(), cfg.data_scattering(), cfg.apertures, cfg.noise,
                           TruthMeta{cfg.shape, cfg.kappa, cfg.true_center});
}

/// Catalog name, or "circle:R" for a circle of radius R about the origin.
inline ParametricCurve truth_from_spec(const std::string& spec, const Point& center) {
  if (spec.rfind("circle:", 0) == 0) {
    double r = 0.0;
    try {
      std::size_t used = 0;
      r = std::stod(spec.substr(7), &used);
      if (used != spec.size() - 7) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("bad circle radius in '" + spec + "'");
    }
    if (!(r > 0.0)) throw ConfigError("circle radius must be positive");
    return circle(center, r);
  }
  return catalog_shape(spec).translated(center);
}

struct Reconstruction {
  std::vector<ChainResult> chains;
  PosteriorSummary summary;
  std::optional<ParametricCurve> truth;
  std::optional<double> discrepancy;
  std::optional<double> warm_start_cost;
  double sigma = 0.0;
  bool prior_only = false;
};

/// Runs `cfg.chains` chains on `obs` (or on the prior alone) and summarizes.
inline Reconstruction reconstruct(const ExperimentConfig& cfg, const ObservationSet& obs,
                                  bool prior_only = false) {
  cfg.validate();
  const ShapePrior prior(cfg.prior);
  Reconstruction out;
  out.prior_only = prior_only;
  if (prior_only) {
    out.chains = run_chains(cfg.chains, ZeroPotential{}, prior, cfg.chain);
  } else {
    const LikelihoodPotential potential(obs, cfg.inversion_scattering(), cfg.assumed_center,
                                        cfg.forward.r_max, cfg.forward.sigma_fallback);
    out.sigma = potential.sigma();
    std::optional<ReferenceCoefficients> start;
    if (cfg.chain.init == ChainInit::Optimized) {
      auto ws = map_estimate(potential, prior);
      out.warm_start_cost = ws.cost;
      start = std::move(ws.b);
    }
    out.chains = run_chains(cfg.chains, potential, prior, cfg.chain, start);
  }
  std::vector<const ChainResult*> ptrs;
  for (const auto& c : out.chains) ptrs.push_back(&c);
  out.summary = summarize(ptrs, prior, cfg.assumed_center, cfg.chain);
  if (obs.truth) {
    out.truth = catalog_shape(obs.truth->shape).translated(obs.truth->center);
    out.discrepancy =
        boundary_discrepancy(posterior_mean_curve(out.summary, prior, cfg.assumed_center), *out.truth,
                             512);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output files

namespace detail {

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// chain,iteration,phi,b1..bm; retained samples only.
inline std::string chain_csv(const std::vector<ChainResult>& chains, int m) {
  std::ostringstream out;
  out << "chain,iteration,phi";
  for (int k = 1; k <= m; ++k) out << ",b" << k;
  out << "\n";
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (const auto& s : chains[c].samples) {
      out << c << "," << s.iteration << "," << detail::fmt(s.phi);
      for (int k = 0; k < s.b.size(); ++k) out << "," << detail::fmt(s.b.values[k]);
      out << "\n";
    }
  return out.str();
}

struct BoundaryTable {
  Point center = Point::Zero();
  std::optional<Point> true_center;
  std::vector<double> theta, r_mean, r_low, r_high;
  std::optional<std::vector<double>> r_true;

  std::vector<Point> mean_points() const {
    std::vector<Point> p;
    for (std::size_t k = 0; k < theta.size(); ++k) p.push_back(center + r_mean[k] * direction(theta[k]));
    return p;
  }
};

inline BoundaryTable boundary_table(const PosteriorSummary& s, const std::optional<ParametricCurve>& truth,
                                    std::optional<Point> true_center = std::nullopt) {
  BoundaryTable t;
  t.center = s.center;
  t.true_center = true_center;
  t.theta = s.theta;
  t.r_mean = s.mean_radius;
  t.r_low = s.radius_low;
  t.r_high = s.radius_high;
  if (truth) {
    const auto poly = truth->sample(4096);
    std::vector<double> r;
    for (double th : s.theta) {
      const double v = ray_radius(poly, s.center, th);
      r.push_back(std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN());
    }
    t.r_true = std::move(r);
  }
  return t;
}

/// `# center x y` (and `# true_center x y`) comment lines, then
/// theta,[r_true,]r_mean,r_low,r_high.
inline std::string boundary_csv(const BoundaryTable& t) {
  using detail::fmt;
  std::ostringstream out;
  out << "# center " << fmt(t.center.x()) << " " << fmt(t.center.y()) << "\n";
  if (t.true_center) out << "# true_center " << fmt(t.true_center->x()) << " " << fmt(t.true_center->y()) << "\n";
  out << (t.r_true ? "theta,r_true,r_mean,r_low,r_high\n" : "theta,r_mean,r_low,r_high\n");
  for (std::size_t k = 0; k < t.theta.size(); ++k) {
    out << fmt(t.theta[k]);
    if (t.r_true) out << "," << fmt((*t.r_true)[k]);
    out << "," << fmt(t.r_mean[k]) << "," << fmt(t.r_low[k]) << "," << fmt(t.r_high[k]) << "\n";
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double csv_double(const std::string& s, int line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return parse_double(s, line, "csv cell");
}

}  // namespace detail

inline BoundaryTable parse_boundary_csv(std::istream& in) {
  BoundaryTable t;
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto tok = detail::split_ws(line.substr(1));
      if (tok.size() == 3 && (tok[0] == "center" || tok[0] == "true_center")) {
        const Point p(detail::parse_double(tok[1], lineno, tok[0]), detail::parse_double(tok[2], lineno, tok[0]));
        if (tok[0] == "center") t.center = p;
        else t.true_center = p;
      }
      continue;
    }
    header = detail::split_csv(line);
    break;
  }
  auto column = [&](const char* name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_theta = column("theta"), c_mean = column("r_mean"), c_low = column("r_low"),
            c_high = column("r_high"), c_true = column("r_true");
  for (auto [c, name] : {std::pair{c_theta, "theta"}, {c_mean, "r_mean"}, {c_low, "r_low"}, {c_high, "r_high"}})
    if (c < 0) throw ParseError(std::string("boundary CSV is missing column '") + name + "'");
  if (c_true >= 0) t.r_true.emplace();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size())
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                       " cells, found " + std::to_string(cells.size()));
    t.theta.push_back(detail::csv_double(cells[c_theta], lineno));
    t.r_mean.push_back(detail::csv_double(cells[c_mean], lineno));
    t.r_low.push_back(detail::csv_double(cells[c_low], lineno));
    t.r_high.push_back(detail::csv_double(cells[c_high], lineno));
    if (c_true >= 0) t.r_true->push_back(detail::csv_double(cells[c_true], lineno));
  }
  if (t.theta.empty()) throw ParseError("boundary CSV has no rows");
  return t;
}

inline BoundaryTable load_boundary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open boundary CSV " + path.string());
  return parse_boundary_csv(in);
}

/// phi column of a chain CSV, in file order.
inline std::vector<double> load_phi_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open chain file " + path.string());
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = detail::split_csv(line);
  const auto it = std::find(header.begin(), header.end(), "phi");
  if (it == header.end()) throw ParseError("chain file is missing column 'phi'");
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<double> phi;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) throw ParseError("chain file line " + std::to_string(lineno) + " is ragged");
    phi.push_back(detail::csv_double(cells[col], lineno));
  }
  return phi;
}

inline std::string summary_json(const ExperimentConfig& cfg, const Reconstruction& r) {
  using nlohmann::json;
  json j;
  j["shape"] = cfg.shape;
  j["prior_only"] = r.prior_only;
  j["chains"] = r.chains.size();
  j["n_samples"] = r.summary.n_samples;
  j["acceptance_rate"] = r.summary.acceptance_rate;
  std::vector<double> betas;
  std::vector<std::uint64_t> seeds;
  for (const auto& c : r.chains) {
    betas.push_back(c.final_beta);
    seeds.push_back(c.seed);
  }
  j["seeds"] = seeds;
  j["final_beta"] = betas;
  j["sigma"] = r.sigma;
  std::vector<double> phi;
  for (const auto& c : r.chains)
    for (const auto& s : c.samples) phi.push_back(s.phi);
  if (!phi.empty()) {
    double sum = 0.0;
    for (double v : phi) sum += v;
    j["phi"] = {{"mean", sum / phi.size()},
                {"min", *std::min_element(phi.begin(), phi.end())},
                {"max", *std::max_element(phi.begin(), phi.end())},
                {"last", phi.back()}};
  }
  if (r.warm_start_cost) j["warm_start_cost"] = *r.warm_start_cost;
  if (r.discrepancy) j["boundary_discrepancy"] = *r.discrepancy;
  j["assumed_center"] = {r.summary.center.x(), r.summary.center.y()};
  j["mean_coefficients"] = std::vector<double>(r.summary.mean_coefficients.data(),
                                               r.summary.mean_coefficients.data() + r.summary.mean_coefficients.size());
  j["mean_reference"] = std::vector<double>(r.summary.mean_reference.data(),
                                            r.summary.mean_reference.data() + r.summary.mean_reference.size());
  j["credible_band"] = {cfg.chain.band_lower, cfg.chain.band_upper};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Evaluation

struct Evaluation {
  double discrepancy = 0.0;
  double radial_max = 0.0;
  double radial_mean = 0.0;
  double radial_rms = 0.0;
  int points = 0;
};

/// Compares the mean boundary of `t` with `truth` on the table's own theta grid.
/// The grid must be uniform on [0, 2pi).
inline Evaluation evaluate(const BoundaryTable& t, const ParametricCurve& truth) {
  const std::size_t n = t.theta.size();
  if (n < 16) throw ConfigError("boundary grid needs at least 16 points");
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(t.theta[k] - kTwoPi * double(k) / double(n)) > 1e-9)
      throw ConfigError("boundary theta grid is not uniform on [0, 2pi) at row " + std::to_string(k));
  const auto poly = truth.sample(4096);
  std::vector<Point> truth_pts, mean_pts = t.mean_points();
  Evaluation e;
  e.points = static_cast<int>(n);
  double sum = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double rt = ray_radius(poly, t.center, t.theta[k]);
    if (!std::isfinite(rt)) throw ConfigError("truth is not star-shaped about the table center");
    truth_pts.push_back(t.center + rt * direction(t.theta[k]));
    const double err = std::abs(t.r_mean[k] - rt);
    e.radial_max = std::max(e.radial_max, err);
    sum += err;
    sq += err * err;
  }
  e.radial_mean = sum / double(n);
  e.radial_rms = std::sqrt(sq / double(n));
  e.discrepancy = hausdorff_distance(mean_pts, truth_pts);
  return e;
}

inline std::string verdict_line(const Evaluation& e, double threshold) {
  using detail::fmt;
  char thr[32];
  std::snprintf(thr, sizeof thr, "%.15g", threshold);  // user input, print as typed
  return std::string("verdict ") + (e.discrepancy < threshold ? "pass" : "fail") +
         " discrepancy=" + fmt(e.discrepancy) + " threshold=" + thr +
         " radial_max=" + fmt(e.radial_max) + " radial_mean=" + fmt(e.radial_mean) +
         " radial_rms=" + fmt(e.radial_rms) + " points=" + std::to_string(e.points);
}

// ---------------------------------------------------------------------------
// Catalog listing

inline std::string catalog_listing(bool as_json) {
  if (as_json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& name : catalog_names()) {
      const auto e = catalog_entry(name);
      arr.push_back({{"name", name}, {"formula", e.formula}, {"duplicate_formula", has_duplicate_formula(name)}});
    }
    return arr.dump(2) + "\n";
  }
  std::ostringstream out;
  for (const auto& name : catalog_names()) {
    const auto e = catalog_entry(name);
    out << name << "\t" << e.formula << (has_duplicate_formula(name) ? "\t(duplicate formula)" : "") << "\n";
  }
  return out.str();
}

}  // namespace scatter_bayes
