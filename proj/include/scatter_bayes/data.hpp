#pragma once

#include <charconv>
#include <cstdint>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "scatter_bayes/errors.hpp"
#include "scatter_bayes/forward.hpp"
#include "scatter_bayes/geometry.hpp"

namespace scatter_bayes {

enum class ObservationKind { Gamma1, Gamma2, Gamma3, Custom };
enum class IncidentKind { Gamma1, Gamma2, Custom };

inline constexpr double kDefaultObsSpacing = kTwoPi / 64.0;

struct ApertureConfig {
  ObservationKind obs_kind = ObservationKind::Gamma1;
  /// Interval used when obs_kind == Custom.
  double obs_from = 0.0;
  double obs_to = kTwoPi;
  double obs_spacing = kDefaultObsSpacing;
  IncidentKind inc_kind = IncidentKind::Gamma2;
  /// Angles used when inc_kind == Custom.
  std::vector<double> inc_custom;

  void validate() const {
    if (!(obs_spacing > 0.0)) throw ConfigError("aperture spacing must be positive");
    if (obs_kind == ObservationKind::Custom && !(obs_to >= obs_from))
      throw ConfigError("custom observation interval is empty");
    if (inc_kind == IncidentKind::Custom && inc_custom.empty())
      throw ConfigError("custom incident aperture is empty");
  }

  /// Observation interval [from, to] in radians.
  std::pair<double, double> obs_interval() const {
    switch (obs_kind) {
      case ObservationKind::Gamma1: return {0.0, kTwoPi};
      case ObservationKind::Gamma2: return {0.0, std::numbers::pi};
      case ObservationKind::Gamma3: return {0.0, std::numbers::pi / 2};
      case ObservationKind::Custom: return {obs_from, obs_to};
    }
    return {0.0, 0.0};
  }
};

inline std::string to_string(ObservationKind k) {
  switch (k) {
    case ObservationKind::Gamma1: return "gamma1_o";
    case ObservationKind::Gamma2: return "gamma2_o";
    case ObservationKind::Gamma3: return "gamma3_o";
    case ObservationKind::Custom: return "custom";
  }
  return "?";
}

inline std::string to_string(IncidentKind k) {
  switch (k) {
    case IncidentKind::Gamma1: return "gamma1_i";
    case IncidentKind::Gamma2: return "gamma2_i";
    case IncidentKind::Custom: return "custom";
  }
  return "?";
}

inline ObservationKind parse_observation_kind(const std::string& s) {
  if (s == "gamma1_o") return ObservationKind::Gamma1;
  if (s == "gamma2_o") return ObservationKind::Gamma2;
  if (s == "gamma3_o") return ObservationKind::Gamma3;
  if (s == "custom") return ObservationKind::Custom;
  throw ConfigError("unknown observation aperture '" + s +
                    "'; expected gamma1_o, gamma2_o, gamma3_o or custom");
}

inline IncidentKind parse_incident_kind(const std::string& s) {
  if (s == "gamma1_i") return IncidentKind::Gamma1;
  if (s == "gamma2_i") return IncidentKind::Gamma2;
  if (s == "custom") return IncidentKind::Custom;
  throw ConfigError("unknown incident aperture '" + s + "'; expected gamma1_i, gamma2_i or custom");
}

struct ObservationAngles {
  std::vector<double> obs;
  std::vector<double> inc;
};

/// Equispaced observation angles over the aperture (both endpoints for a
/// proper arc, the 2pi endpoint dropped for the full circle) and the incident
/// angles of the incident aperture.
inline ObservationAngles observation_angles(const ApertureConfig& ap) {
  ap.validate();
  ObservationAngles out;
  const auto [from, to] = ap.obs_interval();
  const double span = to - from;
  const bool full_circle = span >= kTwoPi - 1e-12;
  // Tolerate rounding when span is an exact multiple of the spacing.
  const double ratio = span / ap.obs_spacing;
  int count = static_cast<int>(std::floor(ratio + 1e-9));
  if (!full_circle) count += 1;
  for (int k = 0; k < count; ++k) out.obs.push_back(from + k * ap.obs_spacing);
  switch (ap.inc_kind) {
    case IncidentKind::Gamma1: out.inc = {0.0}; break;
    case IncidentKind::Gamma2: out.inc = {std::numbers::pi / 2, 3 * std::numbers::pi / 2}; break;
    case IncidentKind::Custom: out.inc = ap.inc_custom; break;
  }
  if (out.obs.empty() || out.inc.empty()) throw ConfigError("aperture yields no directions");
  return out;
}

inline FarFieldPattern forward_map(const ParametricCurve& curve, const ScatteringConfig& cfg,
                                   const ApertureConfig& apertures) {
  const auto angles = observation_angles(apertures);
  return forward_map(curve, cfg, angles.obs, angles.inc);
}

struct NoiseConfig {
  double eta1 = 0.01;
  double eta2 = 0.01;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(eta1 >= 0.0) || !(eta2 >= 0.0)) throw ConfigError("noise levels must be non-negative");
  }
};

struct TruthMeta {
  std::string shape;
  double kappa = 1.0;
  Point center = Point::Zero();
};

struct ObservationSet {
  FarFieldPattern y;
  ApertureConfig apertures;
  NoiseConfig noise;
  double kappa = 1.0;
  /// Per-component noise scale entering the likelihood; 0 for noiseless data
  /// (the sampler then falls back to a configured relative level).
  double sigma = 1.0;
  std::optional<TruthMeta> truth;
};

inline constexpr int kDataQuadrature = 128;

/// Synthetic data: y = u_inf + (eta1 z1 + i eta2 z2) ||u_inf||_inf with
/// independent standard normal z1, z2 per entry and the max-modulus norm over
/// the whole pattern.
inline ObservationSet make_observations(const ParametricCurve& truth, const ScatteringConfig& cfg,
                                        const ApertureConfig& apertures, const NoiseConfig& noise,
                                        std::optional<TruthMeta> meta = std::nullopt) {
  noise.validate();
  ObservationSet set;
  set.y = forward_map(truth, cfg, apertures);
  set.apertures = apertures;
  set.noise = noise;
  set.kappa = cfg.kappa;
  set.truth = std::move(meta);
  const double scale = set.y.values.cwiseAbs().maxCoeff();
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index c = 0; c < set.y.values.cols(); ++c) {
    for (Eigen::Index r = 0; r < set.y.values.rows(); ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      set.y.values(r, c) += cdouble(noise.eta1 * re, noise.eta2 * im) * scale;
    }
  }
  set.sigma = std::max(noise.eta1, noise.eta2) * scale;
  return set;
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr int kObservationFormatVersion = 1;

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, int line, const std::string& field) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("line " + std::to_string(line) + ": field '" + field + "': cannot parse '" +
                     std::string(s) + "' as a number");
  return v;
}

inline std::uint64_t parse_u64(std::string_view s, int line, const std::string& field) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ParseError("line " + std::to_string(line) + ": field '" + field + "': cannot parse '" +
                     std::string(s) + "' as an unsigned integer");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

/// Write to a sibling temp file, then rename over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Text layout:
///   scatter_bayes_observations <version>
///   key value...            (header)
///   data <rows>
///   obs_angle inc_angle re im   (one row per entry, column-major over incidents)
///   end
inline std::string serialize_observations(const ObservationSet& set) {
  using detail::format_double;
  std::ostringstream out;
  out << "scatter_bayes_observations " << kObservationFormatVersion << "\n";
  out << "kappa " << format_double(set.kappa) << "\n";
  const auto& ap = set.apertures;
  out << "obs_aperture " << to_string(ap.obs_kind) << " " << format_double(ap.obs_from) << " "
      << format_double(ap.obs_to) << "\n";
  out << "obs_spacing " << format_double(ap.obs_spacing) << "\n";
  out << "inc_aperture " << to_string(ap.inc_kind);
  for (double a : ap.inc_custom) out << " " << format_double(a);
  out << "\n";
  out << "noise " << format_double(set.noise.eta1) << " " << format_double(set.noise.eta2) << " "
      << set.noise.seed << "\n";
  out << "sigma " << format_double(set.sigma) << "\n";
  if (set.truth) {
    out << "truth " << set.truth->shape << " " << format_double(set.truth->kappa) << " "
        << format_double(set.truth->center.x()) << " " << format_double(set.truth->center.y())
        << "\n";
  }
  out << "shape " << set.y.values.rows() << " " << set.y.values.cols() << "\n";
  out << "data " << set.y.values.size() << "\n";
  for (Eigen::Index c = 0; c < set.y.values.cols(); ++c) {
    for (Eigen::Index r = 0; r < set.y.values.rows(); ++r) {
      const auto v = set.y.values(r, c);
      out << format_double(set.y.obs_angles[r]) << " " << format_double(set.y.inc_angles[c]) << " "
          << format_double(v.real()) << " " << format_double(v.imag()) << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

inline ObservationSet parse_observations(std::istream& in) {
  using detail::parse_double;
  ObservationSet set;
  std::string line;
  int lineno = 0;
  auto next = [&](const char* expecting) {
    if (!std::getline(in, line))
      throw ParseError(std::string("unexpected end of file: missing ") + expecting + " section");
    ++lineno;
    return detail::split_ws(line);
  };

  auto head = next("version header");
  if (head.size() != 2 || head[0] != "scatter_bayes_observations")
    throw ParseError("line 1: not an observation file (missing 'scatter_bayes_observations' header)");
  const int version = static_cast<int>(parse_double(head[1], lineno, "version"));
  if (version != kObservationFormatVersion)
    throw ParseError("incompatible observation file version " + head[1] + " (expected " +
                     std::to_string(kObservationFormatVersion) + ")");

  long rows = -1, cols = -1;
  bool have_kappa = false, have_sigma = false;
  for (;;) {
    auto tok = next("data");
    if (tok.empty()) continue;
    const auto& key = tok[0];
    auto need = [&](std::size_t n) {
      if (tok.size() < n + 1)
        throw ParseError("line " + std::to_string(lineno) + ": field '" + key + "' expects " +
                         std::to_string(n) + " value(s)");
    };
    if (key == "kappa") {
      need(1);
      set.kappa = parse_double(tok[1], lineno, key);
      have_kappa = true;
    } else if (key == "obs_aperture") {
      need(3);
      try {
        set.apertures.obs_kind = parse_observation_kind(tok[1]);
      } catch (const ConfigError& e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
      }
      set.apertures.obs_from = parse_double(tok[2], lineno, key);
      set.apertures.obs_to = parse_double(tok[3], lineno, key);
    } else if (key == "obs_spacing") {
      need(1);
      set.apertures.obs_spacing = parse_double(tok[1], lineno, key);
    } else if (key == "inc_aperture") {
      need(1);
      try {
        set.apertures.inc_kind = parse_incident_kind(tok[1]);
      } catch (const ConfigError& e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
      }
      for (std::size_t i = 2; i < tok.size(); ++i)
        set.apertures.inc_custom.push_back(parse_double(tok[i], lineno, key));
    } else if (key == "noise") {
      need(3);
      set.noise.eta1 = parse_double(tok[1], lineno, key);
      set.noise.eta2 = parse_double(tok[2], lineno, key);
      set.noise.seed = detail::parse_u64(tok[3], lineno, key);
    } else if (key == "sigma") {
      need(1);
      set.sigma = parse_double(tok[1], lineno, key);
      have_sigma = true;
    } else if (key == "truth") {
      need(4);
      TruthMeta t;
      t.shape = tok[1];
      t.kappa = parse_double(tok[2], lineno, key);
      t.center = Point(parse_double(tok[3], lineno, key), parse_double(tok[4], lineno, key));
      set.truth = t;
    } else if (key == "shape") {
      need(2);
      rows = static_cast<long>(parse_double(tok[1], lineno, key));
      cols = static_cast<long>(parse_double(tok[2], lineno, key));
    } else if (key == "data") {
      need(1);
      break;
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown field '" + key + "'");
    }
  }
  if (!have_kappa) throw ParseError("missing 'kappa' field in header");
  if (!have_sigma) throw ParseError("missing 'sigma' field in header");
  if (rows <= 0 || cols <= 0) throw ParseError("missing or invalid 'shape' field in header");

  set.y.values.resize(rows, cols);
  set.y.obs_angles.assign(static_cast<std::size_t>(rows), 0.0);
  set.y.inc_angles.assign(static_cast<std::size_t>(cols), 0.0);
  for (long c = 0; c < cols; ++c) {
    for (long r = 0; r < rows; ++r) {
      auto tok = next("data rows");
      if (tok.size() != 4)
        throw ParseError("line " + std::to_string(lineno) + ": data row needs 4 fields, got " +
                         std::to_string(tok.size()));
      set.y.obs_angles[r] = parse_double(tok[0], lineno, "obs_angle");
      set.y.inc_angles[c] = parse_double(tok[1], lineno, "inc_angle");
      set.y.values(r, c) = cdouble(parse_double(tok[2], lineno, "re"), parse_double(tok[3], lineno, "im"));
    }
  }
  auto tail = next("end");
  if (tail.size() != 1 || tail[0] != "end")
    throw ParseError("line " + std::to_string(lineno) + ": expected 'end' after data rows");
  if (!set.y.values.allFinite()) throw ParseError("non-finite observation values");
  if (!(set.sigma >= 0.0)) throw ParseError("sigma must be non-negative");
  return set;
}

inline void save_observations(const ObservationSet& set, const std::filesystem::path& path) {
  detail::write_atomic(path, serialize_observations(set));
}

inline ObservationSet load_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open observation file " + path.string());
  return parse_observations(in);
}

}  // namespace scatter_bayes
