#include "kinchain/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace kinchain::quad {

GaussRule::GaussRule(int n) {
  if (n < 1) throw std::invalid_argument("GaussRule: order must be >= 1");
  x.resize(n);
  w.resize(n);
  // Newton iteration on Legendre polynomials, symmetric roots.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

namespace {
const GaussRule& cached_rule(int order) {
  static const GaussRule g4(4), g8(8), g10(10);
  switch (order) {
    case 4: return g4;
    case 8: return g8;
    case 10: return g10;
    default: {
      thread_local GaussRule custom(order);
      if (static_cast<int>(custom.x.size()) != order) custom = GaussRule(order);
      return custom;
    }
  }
}

double panel_sum(const std::function<double(double)>& f, double a, double b,
                 const GaussRule& g) {
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + half * g.x[i]);
  return s * half;
}
}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels, int order) {
  const GaussRule& g = cached_rule(order);
  double h = (b - a) / panels, s = 0.0;
  for (int p = 0; p < panels; ++p) s += panel_sum(f, a + p * h, a + (p + 1) * h, g);
  return s;
}

double integrate_torus(const std::function<double(double)>& f, int panels,
                       int order) {
  // Mirror panels about 0: each positive panel is paired with its
  // reflection, so even/odd structure cancels to rounding.
  int half = panels / 2;
  const GaussRule& g = cached_rule(order);
  double h = 0.5 / half, s = 0.0;
  for (int p = 0; p < half; ++p) {
    double a = p * h, b = (p + 1) * h;
    double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      double k = mid + hw * g.x[i];
      s += g.w[i] * hw * (f(k) + f(-k));
    }
  }
  return s;
}

double integrate_torus_graded(const std::function<double(double)>& f,
                              int panels_per_side, double kmin, int order) {
  const GaussRule& g = cached_rule(order);
  double ratio = std::pow(0.5 / kmin, 1.0 / panels_per_side);
  double s = 0.0;
  double lo = kmin;
  s += panel_sum([&](double k) { return f(k) + f(-k); }, 0.0, kmin, g);
  for (int p = 0; p < panels_per_side; ++p) {
    double hi = std::min(0.5, lo * ratio);
    s += panel_sum([&](double k) { return f(k) + f(-k); }, lo, hi, g);
    lo = hi;
  }
  return s;
}

Grid uniform_grid(int n) {
  Grid grid;
  grid.k.resize(n);
  grid.w.assign(n, 1.0 / n);
  for (int j = 0; j < n; ++j) grid.k[j] = static_cast<double>(j - n / 2) / n;
  return grid;
}

Grid graded_grid(int n_cells_per_side, double kmin, int order) {
  const GaussRule& g = cached_rule(order);
  Grid grid;
  std::vector<double> bounds;
  bounds.push_back(0.0);
  bounds.push_back(kmin);
  double ratio = std::pow(0.5 / kmin, 1.0 / n_cells_per_side);
  double lo = kmin;
  for (int p = 0; p < n_cells_per_side; ++p) {
    lo = std::min(0.5, lo * ratio);
    bounds.push_back(lo);
  }
  // negative side first so nodes come out sorted
  for (std::size_t c = bounds.size() - 1; c >= 1; --c) {
    double a = -bounds[c], b = -bounds[c - 1];
    double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      grid.k.push_back(mid + hw * g.x[i]);
      grid.w.push_back(g.w[i] * hw);
    }
  }
  for (std::size_t c = 0; c + 1 < bounds.size(); ++c) {
    double a = bounds[c], b = bounds[c + 1];
    double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      grid.k.push_back(mid + hw * g.x[i]);
      grid.w.push_back(g.w[i] * hw);
    }
  }
  return grid;
}

}  // namespace kinchain::quad
