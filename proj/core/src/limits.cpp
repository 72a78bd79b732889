#include "kinchain/limits.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kinchain/quadrature.hpp"
#include "kinchain/stats.hpp"

namespace kinchain::limits {

double psi_observable(const model::DispersionModel& m, TorusPoint k) {
  return Observable{&m}(k.k);
}

namespace {
// pi measure of (0, b]: integral of (1/2) r(k) dk
double pi_mass_up_to(double b) {
  return quad::integrate([](double k) { return 0.5 * model::r_total(k); }, 0.0,
                         b, 64, 10);
}

// Largest k in (0, 1/2) with f(k) > lambda, assuming f decreasing through
// the threshold; bisection after a coarse scan for the last crossing.
double sublevel_boundary(const std::function<double(double)>& f, double lambda) {
  const int n_scan = 4096;
  double prev = 1.0 / (2.0 * n_scan);
  double fprev = f(prev);
  if (fprev <= lambda) {
    // threshold crossed before the first scan point: bracket toward 0
    double lo = 1e-300, hi = prev;
    for (int it = 0; it < 2000; ++it) {
      double mid = 0.5 * (lo + hi);
      (f(mid) > lambda ? lo : hi) = mid;
      if (hi - lo < 1e-16 * hi) break;
    }
    return 0.5 * (lo + hi);
  }
  double lo = prev, hi = 0.5;
  bool found = false;
  for (int i = 2; i <= n_scan; ++i) {
    double k = 0.5 * i / n_scan;
    double fk = f(k);
    if (fprev > lambda && fk <= lambda) {
      lo = prev;
      hi = k;
      found = true;
      break;
    }
    prev = k;
    fprev = fk;
  }
  if (!found)
    throw std::runtime_error("tail_function: no sublevel boundary (lambda too small?)");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > lambda ? lo : hi) = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}
}  // namespace

double tail_function(const model::DispersionModel& m, double lambda) {
  if (lambda < 1.0) throw std::invalid_argument("tail_function: lambda >= 1 required");
  Observable psi{&m};
  double k_lambda = sublevel_boundary([&](double k) { return psi(k); }, lambda);
  return pi_mass_up_to(k_lambda);
}

double tail_function_minus(const model::DispersionModel& m, double lambda) {
  Observable psi{&m};
  double k_lambda = sublevel_boundary([&](double k) { return -psi(-k); }, lambda);
  return pi_mass_up_to(k_lambda);
}

double theta_tail(double lambda) {
  if (lambda < 1.0) throw std::invalid_argument("theta_tail: lambda >= 1 required");
  double k_lambda =
      sublevel_boundary([](double k) { return model::theta(k); }, lambda);
  return 2.0 * pi_mass_up_to(k_lambda);  // both signs of k
}

TailConstant tail_constant(const model::DispersionModel& m) {
  if (m.pinned())
    throw std::invalid_argument("tail_constant: unpinned model required");
  TailConstant out;
  const double alpha = 1.5;
  for (double e : {2.0, 2.5, 3.0, 3.5, 4.0}) out.ladder.push_back(std::pow(10.0, e));
  std::vector<double> scaled_minus;
  for (double lam : out.ladder) {
    out.scaled.push_back(std::pow(lam, alpha) * tail_function(m, lam));
    scaled_minus.push_back(std::pow(lam, alpha) * tail_function_minus(m, lam));
  }
  auto aitken = [](const std::vector<double>& v) {
    std::size_t n = v.size();
    double d1 = v[n - 1] - v[n - 2], d2 = v[n - 2] - v[n - 3];
    double denom = d1 - d2;
    if (std::fabs(denom) < 1e-300) return v[n - 1];
    return v[n - 1] - d1 * d1 / denom;
  };
  out.c_star_plus = aitken(out.scaled);
  out.c_star_minus = aitken(scaled_minus);
  double lo = out.scaled[0], hi = out.scaled[0];
  for (double v : out.scaled) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.relative_spread = (hi - lo) / out.c_star_plus;
  if (out.relative_spread > 0.01)
    throw std::runtime_error("tail_constant: ladder has not converged");
  // correction exponent from successive differences: ratio = (sqrt 10)^{-alpha1}
  {
    double d1 = std::fabs(out.scaled[1] - out.scaled[2]);
    double d2 = std::fabs(out.scaled[2] - out.scaled[3]);
    if (d1 > 0 && d2 > 0)
      out.alpha1_fitted = std::log(d1 / d2) / std::log(std::sqrt(10.0));
  }
  double a2 = m.alpha_hat_second_deriv_at_zero();
  out.paper_closed_form = std::pow(2.0, -0.25) * std::pow(3.0, -2.5) *
                          std::sqrt(M_PI) * std::pow(a2, 0.75);
  return out;
}

std::complex<double> levy_exponent(double p, double alpha, double c_plus,
                                   double c_minus) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw std::invalid_argument("levy_exponent: alpha in (1,2) required");
  if (p == 0.0) return {0.0, 0.0};
  // psi(p) = |p|^alpha psi(sign p): substitute u = |p| lambda.
  double sgn = p > 0 ? 1.0 : -1.0;
  double cp = sgn > 0 ? c_plus : c_minus;
  double cm = sgn > 0 ? c_minus : c_plus;
  // one-sided integral over u in (0, inf) of (1 + i u s - e^{ius}) u^{-1-alpha};
  // only ever evaluated at s = +-1 thanks to the exact |p|^alpha scaling
  auto one_side = [&](double s) {
    const double delta = 1e-3, Lambda = 2000.0;
    std::complex<double> acc{0.0, 0.0};
    // series on (0, delta): -sum_{n>=2} (is)^n delta^{n-alpha} / (n! (n-alpha))
    std::complex<double> is{0.0, s}, pow_is = is * is;
    double fact = 2.0;
    for (int n = 2; n <= 12; ++n) {
      acc -= pow_is * std::pow(delta, n - alpha) / (fact * (n - alpha));
      pow_is *= is;
      fact *= (n + 1);
    }
    // geometric panels through the u^{1-alpha} start, then uniform panels
    // of width 1/2 so GL-10 resolves e^{ius} at |s| = 1
    static const quad::GaussRule g(10);
    auto add_panel = [&](double a, double b) {
      double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        double u = mid + hw * g.x[i];
        std::complex<double> val =
            (std::complex<double>{1.0, u * s} -
             std::exp(std::complex<double>{0.0, u * s})) *
            std::pow(u, -1.0 - alpha);
        acc += g.w[i] * hw * val;
      }
    };
    double lo = delta;
    while (lo < 1.0) {
      double hi = std::min(1.0, 2.0 * lo);
      add_panel(lo, hi);
      lo = hi;
    }
    const int panels = 2 * static_cast<int>(Lambda - 1.0);
    double h = (Lambda - 1.0) / panels;
    for (int q = 0; q < panels; ++q) add_panel(1.0 + q * h, 1.0 + (q + 1) * h);
    // analytic tail from Lambda: (1 + ius) part exactly, e^{ius} by parts
    // twice; the remainder is O(Lambda^{-3-alpha})
    acc += std::pow(Lambda, -alpha) / alpha;
    acc += std::complex<double>{0.0, s} * std::pow(Lambda, 1.0 - alpha) / (alpha - 1.0);
    std::complex<double> eiLs = std::exp(std::complex<double>{0.0, Lambda * s});
    std::complex<double> isv{0.0, s};
    acc += eiLs * std::pow(Lambda, -1.0 - alpha) / isv;
    acc += (1.0 + alpha) * eiLs * std::pow(Lambda, -2.0 - alpha) / (isv * isv);
    return acc;
  };
  std::complex<double> total = cp * one_side(1.0) + cm * one_side(-1.0);
  return alpha * std::pow(std::fabs(p), alpha) * total;
}

double theta_bar() {
  return quad::integrate_torus(
      [](double k) { return model::theta(k) * 0.5 * model::r_total(k); });
}

double stable_c_hat_formula(const model::DispersionModel& m) {
  if (m.pinned())
    throw std::invalid_argument("stable_c_hat_formula: unpinned model required");
  double a2 = m.alpha_hat_second_deriv_at_zero();
  return std::pow(M_PI * M_PI * a2 / 2.0, 0.75);
}

PipelineChat stable_c_hat_pipeline(const model::DispersionModel& m) {
  PipelineChat out;
  TailConstant tc = tail_constant(m);
  out.c_star_used = tc.c_star_plus;
  out.theta_bar = theta_bar();
  out.gamma_52 = std::tgamma(2.5);
  // int_0^inf sin^2 x / x^{5/2} dx: geometric panels through the x^{-1/2}
  // behavior at 0, uniform panels to 400, analytic 1/2-part tail
  {
    auto f = [](double x) {
      double sx = std::sin(x);
      return sx * sx * std::pow(x, -2.5);
    };
    const double L = 1000.0;
    double s = 2.0 * std::sqrt(1e-12);  // int_0^d x^{-1/2} from sin^2 x ~ x^2
    double lo = 1e-12;
    while (lo < 1.0) {
      double hi = std::min(1.0, lo * 2.0);
      s += quad::integrate(f, lo, hi, 4, 10);
      lo = hi;
    }
    s += quad::integrate(f, 1.0, L, 4096, 10);
    // tail of (1/2 - cos(2x)/2) x^{-5/2}: mean part exact, oscillation by parts
    s += 0.5 * std::pow(L, -1.5) / 1.5;
    s += std::sin(2.0 * L) * std::pow(L, -2.5) / 4.0;
    out.sine_integral = s;
  }
  const double alpha = 1.5;
  double tilde_c = std::pow(out.theta_bar, -alpha) * std::tgamma(alpha + 1.0) *
                   tc.c_star_plus;
  out.c_hat = levy_exponent(1.0, alpha, tilde_c, tilde_c).real();
  double tilde_c_inv = std::pow(out.theta_bar, -1.0) *
                       std::tgamma(alpha + 1.0) * tc.c_star_plus;
  out.c_hat_theta_inv = levy_exponent(1.0, alpha, tilde_c_inv, tilde_c_inv).real();
  return out;
}

double PoissonSolution::chi(double k) const {
  double r = model::r_total(k);
  return psi(k) + (c1 * model::e_plus(k) + c2 * model::e_minus(k)) / r;
}

double PoissonSolution::P_chi(double k) const {
  double r = model::r_total(k);
  return (a_plus * model::e_minus(k) + a_minus * model::e_plus(k)) / r;
}

PoissonSolution poisson_solve(const std::function<double(double)>& psi) {
  PoissonSolution sol;
  sol.psi = psi;
  auto inner = [&](int iota, const std::function<double(double)>& f) {
    return quad::integrate_torus([&, iota](double k) {
      double e = iota == 1 ? model::e_plus(k) : model::e_minus(k);
      return e * f(k);
    });
  };
  double g_p = inner(1, psi), g_m = inner(-1, psi);
  double mean = 0.5 * (g_p + g_m);  // int psi dpi
  if (std::fabs(mean) > 1e-8)
    throw std::invalid_argument("poisson_solve: psi must have zero pi-mean");
  auto moment = [&](int a, int b) {
    return quad::integrate_torus([a, b](double k) {
      double fa = a == 1 ? model::e_plus(k) : model::e_minus(k);
      double fb = b == 1 ? model::e_plus(k) : model::e_minus(k);
      return fa * fb / model::r_total(k);
    });
  };
  // (I - M)(c1, c2)^T = (<e_{-1},psi>, <e_1,psi>)^T is consistent but
  // singular along the constants direction; replace one row by the
  // zero-mean pin c1 + c2 = 0.
  double M00 = moment(-1, 1), M01 = moment(-1, -1);
  std::vector<std::vector<double>> A{{1.0 - M00, -M01}, {1.0, 1.0}};
  std::vector<double> b{g_m, 0.0};
  auto c = stats::solve_dense(A, b);
  sol.c1 = c[0];
  sol.c2 = c[1];
  sol.a_plus = inner(1, [&](double k) { return sol.chi(k); });
  sol.a_minus = inner(-1, [&](double k) { return sol.chi(k); });
  return sol;
}

double sigma_sq(const model::DispersionModel& m) {
  if (!m.pinned())
    throw std::invalid_argument("sigma_sq: pinned model required (Psi not in L^2 otherwise)");
  // chi = Psi for odd Psi, so sigma^2 = int Psi^2 dpi = (8/9) int omega'^2 / r
  return (8.0 / 9.0) * quad::integrate_torus([&](double k) {
           double op = m.omega_prime(TorusPoint{k});
           return op * op / model::r_total(k);
         });
}

GaussianChats gaussian_c_hats(const model::DispersionModel& m) {
  GaussianChats out;
  double s2 = sigma_sq(m);
  double tb = theta_bar();
  out.candidate_a = 9.0 * s2;
  out.candidate_b = 2.0 * s2 / (tb * tb);
  out.green_kubo_var_rate = 2.0 * quad::integrate_torus([&](double k) {
    double op = m.omega_prime(TorusPoint{k});
    return op * op * model::theta(k);
  });
  return out;
}

LimitConstants limit_constants(const model::DispersionModel& m) {
  LimitConstants c{};
  c.theta_bar = theta_bar();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (m.pinned()) {
    c.c_star_plus = c.c_star_minus = nan;
    c.c_hat_formula = c.c_hat_pipeline = c.c_hat_pipeline_theta_inv = nan;
    c.alpha1_fitted = c.tail_spread = nan;
    c.sigma_sq = sigma_sq(m);
    GaussianChats g = gaussian_c_hats(m);
    c.c_hat_gaussian_a = g.candidate_a;
    c.c_hat_gaussian_b = g.candidate_b;
    c.green_kubo_var_rate = g.green_kubo_var_rate;
  } else {
    TailConstant tc = tail_constant(m);
    c.c_star_plus = tc.c_star_plus;
    c.c_star_minus = tc.c_star_minus;
    c.alpha1_fitted = tc.alpha1_fitted;
    c.tail_spread = tc.relative_spread;
    c.c_hat_formula = stable_c_hat_formula(m);
    PipelineChat pc = stable_c_hat_pipeline(m);
    c.c_hat_pipeline = pc.c_hat;
    c.c_hat_pipeline_theta_inv = pc.c_hat_theta_inv;
    // sigma^2 and the Gaussian coefficients diverge without pinning
    c.sigma_sq = nan;
    c.c_hat_gaussian_a = c.c_hat_gaussian_b = nan;
    c.green_kubo_var_rate = nan;
  }
  return c;
}

}  // namespace kinchain::limits
