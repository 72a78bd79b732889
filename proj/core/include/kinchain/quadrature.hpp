#pragma once

#include <functional>
#include <vector>

namespace kinchain::quad {

/// Nodes/weights of an n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x, w;
  explicit GaussRule(int n);
};

/// Composite Gauss-Legendre integral over [a, b] with `panels` equal panels.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels = 256, int order = 10);

/// Default integral oracle on the torus [-1/2, 1/2]: composite
/// Gauss-Legendre, 2048 panels, summed in mirrored pairs so that odd
/// integrands cancel to rounding.
double integrate_torus(const std::function<double(double)>& f,
                       int panels = 2048, int order = 10);

/// Torus integral on a mesh graded geometrically toward k = 0 on both
/// sides; for integrands with an integrable |k|^{-2a}-type singularity.
double integrate_torus_graded(const std::function<double(double)>& f,
                              int panels_per_side = 512, double kmin = 1e-12,
                              int order = 10);

/// Quadrature grid: nodes and weights covering [-1/2, 1/2].
struct Grid {
  std::vector<double> k, w;
  std::size_t size() const { return k.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) s += w[i] * f(k[i]);
    return s;
  }

  double dot(const std::vector<double>& values) const {
    double s = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) s += w[i] * values[i];
    return s;
  }
};

/// Uniform midpoint grid with n cells (matches the lattice mode set when
/// n = L and cells sit at j/L).
Grid uniform_grid(int n);

/// Symmetric grid of composite Gauss-Legendre cells whose boundaries grade
/// geometrically toward 0; `n_cells_per_side` cells per half-torus, `order`
/// nodes per cell.
Grid graded_grid(int n_cells_per_side = 256, double kmin = 1e-8, int order = 8);

}  // namespace kinchain::quad
