#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "scatter_bayes/experiment.hpp"
#include "scatter_bayes/geometry.hpp"

namespace scatter_bayes {

// Static SVG output. Numbers are printed with fixed precision so identical
// inputs give identical bytes.

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;  // data window
  double width, height, margin;

  double px(double x) const { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); }
  double py(double y) const { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); }
};

inline std::string svg_open(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n" +
         "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"white\"/>\n";
}

inline std::string path_d(const Frame& f, const std::vector<Point>& pts, bool closed) {
  std::string d;
  for (std::size_t i = 0; i < pts.size(); ++i)
    d += (i == 0 ? "M" : " L") + num(f.px(pts[i].x())) + " " + num(f.py(pts[i].y()));
  if (closed && !pts.empty()) d += " Z";
  return d;
}

inline std::vector<Point> ring(const BoundaryTable& t, const std::vector<double>& r) {
  std::vector<Point> p;
  for (std::size_t k = 0; k < t.theta.size(); ++k)
    if (std::isfinite(r[k])) p.push_back(t.center + r[k] * direction(t.theta[k]));
  return p;
}

}  // namespace detail

/// Truth (if present), credible band and posterior mean on equal axes.
inline std::string boundary_svg(const BoundaryTable& t) {
  using detail::num;
  const auto mean = detail::ring(t, t.r_mean);
  const auto low = detail::ring(t, t.r_low);
  const auto high = detail::ring(t, t.r_high);
  const std::vector<Point> truth = t.r_true ? detail::ring(t, *t.r_true) : std::vector<Point>{};

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* set : {&mean, &high, &truth})
    for (const auto& p : *set) {
      lo = std::min({lo, p.x(), p.y()});
      hi = std::max({hi, p.x(), p.y()});
    }
  if (!std::isfinite(lo)) lo = -1, hi = 1;
  const double pad = 0.05 * (hi - lo) + 1e-9;
  // Square window so shapes are not distorted.
  const detail::Frame f{lo - pad, hi + pad, lo - pad, hi + pad, 480, 480, 30};

  std::ostringstream out;
  out << detail::svg_open(f.width, f.height);
  std::vector<Point> low_rev(low.rbegin(), low.rend());
  out << "<path d=\"" << detail::path_d(f, high, true) << " " << detail::path_d(f, low_rev, true)
      << "\" fill=\"#9ecae1\" fill-opacity=\"0.6\" fill-rule=\"evenodd\" stroke=\"none\"/>\n";
  if (!truth.empty())
    out << "<path d=\"" << detail::path_d(f, truth, true)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
  out << "<path d=\"" << detail::path_d(f, mean, true) << "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  out << "<circle cx=\"" << num(f.px(t.center.x())) << "\" cy=\"" << num(f.py(t.center.y()))
      << "\" r=\"3\" fill=\"#d62728\"/>\n";
  int row = 0;
  auto legend = [&](const char* color, const char* label) {
    const double y = 18 + 16 * row++;
    out << "<rect x=\"10\" y=\"" << num(y - 9) << "\" width=\"14\" height=\"10\" fill=\"" << color << "\"/>"
        << "<text x=\"30\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"12\">" << label
        << "</text>\n";
  };
  if (!truth.empty()) legend("black", "truth");
  legend("#d62728", "posterior mean");
  legend("#9ecae1", "credible band");
  out << "</svg>\n";
  return out.str();
}

/// Phi against retained-sample index. Returns "" for an empty trace.
inline std::string trace_svg(const std::vector<double>& phi) {
  using detail::num;
  if (phi.empty()) return {};
  double lo = *std::min_element(phi.begin(), phi.end());
  double hi = *std::max_element(phi.begin(), phi.end());
  if (!(hi > lo)) hi = lo + 1.0;
  const detail::Frame f{0.0, std::max(1.0, double(phi.size() - 1)), lo, hi, 640, 320, 40};
  // Long traces are decimated to at most 2000 vertices.
  const std::size_t stride = std::max<std::size_t>(1, phi.size() / 2000);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < phi.size(); i += stride) pts.emplace_back(double(i), phi[i]);

  std::ostringstream out;
  out << detail::svg_open(f.width, f.height);
  out << "<rect x=\"" << num(f.margin) << "\" y=\"" << num(f.margin) << "\" width=\"" << num(f.width - 2 * f.margin)
      << "\" height=\"" << num(f.height - 2 * f.margin) << "\" fill=\"none\" stroke=\"#888\"/>\n";
  out << "<path d=\"" << detail::path_d(f, pts, false) << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << num(f.margin) << "\" y=\"" << num(f.margin - 8)
      << "\" font-family=\"sans-serif\" font-size=\"12\">phi: min " << num(lo) << ", max " << num(hi) << ", "
      << phi.size() << " samples</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace scatter_bayes
