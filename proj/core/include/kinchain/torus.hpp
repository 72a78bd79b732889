#pragma once

#include <cmath>

namespace kinchain {

/// Wavenumber on the unit torus, canonical representative in [-1/2, 1/2).
struct TorusPoint {
  double k = 0.0;

  static TorusPoint wrap(double x) {
    double r = x - std::floor(x + 0.5);
    if (r >= 0.5) r -= 1.0;  // guard against floor rounding at the edge
    return TorusPoint{r};
  }

  /// Geodesic distance on the torus: min(|k-k'|, 1-|k-k'|).
  static double distance(TorusPoint a, TorusPoint b) {
    double d = std::fabs(a.k - b.k);
    return std::min(d, 1.0 - d);
  }
};

inline TorusPoint operator+(TorusPoint a, double s) { return TorusPoint::wrap(a.k + s); }
inline TorusPoint operator-(TorusPoint a) { return TorusPoint::wrap(-a.k); }

}  // namespace kinchain
