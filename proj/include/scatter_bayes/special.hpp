#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

namespace scatter_bayes {

enum class BesselKind { J, Y };

/// Integer-order Bessel function of the first (J) or second (Y) kind.
inline double bessel(BesselKind kind, int order, double x) {
  if (kind == BesselKind::J) {
    if (x == 0.0) return order == 0 ? 1.0 : 0.0;
    return boost::math::cyl_bessel_j(order, x);
  }
  if (!(x > 0.0)) throw std::domain_error("bessel Y requires x > 0, got " + std::to_string(x));
  return boost::math::cyl_neumann(order, x);
}

namespace detail {
using FastBesselPolicy =
    boost::math::policies::policy<boost::math::policies::promote_double<false>>;
}  // namespace detail

/// J_0, J_1, Y_0, Y_1 at x > 0 in plain double arithmetic; the Nystrom
/// kernels call this once per node pair.
struct BesselPair01 {
  double j0, j1, y0, y1;
};

inline BesselPair01 bessel01(double x) {
  const detail::FastBesselPolicy pol;
  return {boost::math::cyl_bessel_j(0, x, pol), boost::math::cyl_bessel_j(1, x, pol),
          boost::math::cyl_neumann(0, x, pol), boost::math::cyl_neumann(1, x, pol)};
}

/// Hankel function of the first kind, H_n^(1)(x) = J_n(x) + i Y_n(x).
inline std::complex<double> hankel1(int order, double x) {
  return {bessel(BesselKind::J, order, x), bessel(BesselKind::Y, order, x)};
}

}  // namespace scatter_bayes
