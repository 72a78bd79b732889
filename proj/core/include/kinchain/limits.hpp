#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "kinchain/model.hpp"

namespace kinchain::limits {

/// Psi(k) = omega'(k) theta(k), the observable whose additive functionals
/// drive every limit theorem here. Odd, heavy-tailed near k = 0.
struct Observable {
  const model::DispersionModel* model;
  double operator()(double k) const {
    if (k == 0.0) throw std::invalid_argument("Psi: k = 0");
    return model->omega_prime(TorusPoint{k}) * model::theta(k);
  }
  /// Tail index of Psi under pi: 3/2 unpinned, 3 pinned.
  double alpha() const { return model->pinned() ? 3.0 : 1.5; }
};

double psi_observable(const model::DispersionModel& m, TorusPoint k);

/// pi(Psi > lambda) by bisection of the sublevel boundary near 0+ plus
/// quadrature of (1/2) r over (0, k_lambda).
double tail_function(const model::DispersionModel& m, double lambda);
/// Same for the negative tail pi(Psi < -lambda).
double tail_function_minus(const model::DispersionModel& m, double lambda);
/// pi(theta > lambda); theta is model independent.
double theta_tail(double lambda);

struct TailConstant {
  double c_star_plus = 0.0;
  double c_star_minus = 0.0;
  double alpha1_fitted = 0.0;     // correction exponent from the ladder
  double relative_spread = 0.0;   // spread of lambda^{3/2} pi(Psi>lambda)
  std::vector<double> ladder;     // lambda values
  std::vector<double> scaled;     // lambda^{3/2} pi(Psi > lambda)
  double paper_closed_form = 0.0; // 2^{-1/4} 3^{-5/2} pi^{1/2} alpha''(0)^{3/4}
};
/// Numerical limit of lambda^{3/2} pi(+-Psi > lambda) over the geometric
/// ladder {1e2, 1e2.5, ..., 1e4} with Aitken extrapolation. Unpinned only.
TailConstant tail_constant(const model::DispersionModel& m);

/// Levy exponent psi(p) = alpha int (1 + i lam p - e^{i lam p})
/// c(lam) |lam|^{-1-alpha} dlam. Exact |p|^alpha scaling is used: the
/// quadrature runs once at |p| = 1.
std::complex<double> levy_exponent(double p, double alpha, double c_plus,
                                   double c_minus);

/// Closed form (pi^2 alpha''(0) / 2)^{3/4}.
double stable_c_hat_formula(const model::DispersionModel& m);

struct PipelineChat {
  double c_hat = 0.0;            // via the theta_bar^{-alpha} bookkeeping
  double c_star_used = 0.0;
  double sine_integral = 0.0;    // int_0^inf sin^2 x / x^{5/2} dx
  double gamma_52 = 0.0;
  double theta_bar = 0.0;
  double c_hat_theta_inv = 0.0;  // same pipeline with theta_bar^{-1}
};
/// Composes the measured tail constant into the stable coefficient through
/// the jump-time change. Both theta_bar powers are reported; the Monte
/// Carlo fit arbitrates between them.
PipelineChat stable_c_hat_pipeline(const model::DispersionModel& m);

double theta_bar();  // E_pi[theta] (= 2/3 for this kernel)

/// chi = Psi + c1 e_1/r + c2 e_{-1}/r solving chi - P chi = Psi, zero mean.
struct PoissonSolution {
  std::function<double(double)> psi;
  double c1 = 0.0, c2 = 0.0;
  double chi(double k) const;
  double P_chi(double k) const;   // rank-2 image, evaluated exactly
  double a_plus = 0.0, a_minus = 0.0;  // <e_i, chi> used by P_chi
};
PoissonSolution poisson_solve(const std::function<double(double)>& psi);

double sigma_sq(const model::DispersionModel& m);  // pinned; int Psi^2 dpi

struct GaussianChats {
  double candidate_a = 0.0;       // 9 sigma^2
  double candidate_b = 0.0;       // 2 theta_bar^{-2} sigma^2
  double green_kubo_var_rate = 0.0;  // 2 int omega'^2 theta dk = 2 theta_bar^{-1} sigma^2
};
GaussianChats gaussian_c_hats(const model::DispersionModel& m);

struct LimitConstants {
  double c_star_plus, c_star_minus;
  double c_hat_formula;
  double c_hat_pipeline;
  double theta_bar;
  double sigma_sq;           // NaN when the model is unpinned (diverges)
  double c_hat_gaussian_a;   // 9 sigma^2
  double c_hat_gaussian_b;   // 2 theta_bar^{-2} sigma^2
  double c_hat_pipeline_theta_inv;
  double green_kubo_var_rate;
  double alpha1_fitted;
  double tail_spread;
};
LimitConstants limit_constants(const model::DispersionModel& m);

}  // namespace kinchain::limits
