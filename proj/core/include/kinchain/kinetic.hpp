#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "kinchain/model.hpp"
#include "kinchain/quadrature.hpp"
#include "kinchain/rng.hpp"

namespace kinchain::kinetic {

using cplx = std::complex<double>;

/// The scattering generator appears with two normalizations: the jump
/// process of the limit theorems has loss rate R(k) (holds theta = 1/R),
/// while the Wigner-limit equation of the lattice carries 2R(k). They
/// differ by a global time rescale; the scale is explicit everywhere.
enum class GeneratorScale { JumpProcess = 1, WignerLimit = 2 };

inline double scale_factor(GeneratorScale s) {
  return s == GeneratorScale::JumpProcess ? 1.0 : 2.0;
}

/// Fourier-in-x kinetic field: values of W(p, k) on a k quadrature grid at
/// one p. Fields are immutable snapshots; evolution returns new ones.
struct KineticField {
  quad::Grid grid;
  double p = 0.0;
  double time = 0.0;
  std::vector<cplx> values;

  cplx inner_e(int iota) const;           // <e_iota, W> by grid quadrature
  cplx mass() const;                      // int W dk
  double l1_norm() const;                 // int |W| dk
  double ba_norm(double a) const;         // int |W| / |k|^{2a} dk
};

KineticField make_field(quad::Grid grid, double p,
                        const std::function<cplx(double)>& f);

/// Advance dW/dt = -i p omega'(k) W + c L W by exact diagonal exponentials
/// and a trapezoidal (Crank-Nicolson) treatment of the rank-2 coupling,
/// solved exactly through its 2x2 moment system. Second order in dt,
/// unconditionally stable. Warns (returns flag) when |p| sup|omega'| dt > 1.
struct EvolveOptions {
  double dt = 0.05;
  GeneratorScale scale = GeneratorScale::JumpProcess;
};
struct EvolveResult {
  KineticField field;
  bool cfl_warning = false;
};
EvolveResult evolve_kinetic(const KineticField& f0,
                            const model::DispersionModel& m, double T,
                            const EvolveOptions& opt);

/// Monte Carlo probabilistic representation:
///   E[ exp(-i p int_0^t omega'(K_s(k0)) ds) W0(K_t(k0)) ].
struct McSolution {
  cplx mean;
  cplx se;  // componentwise stderr
};
McSolution mc_solution(const std::function<cplx(double)>& W0, double p,
                       double k0, double t, std::size_t n_paths,
                       const model::DispersionModel& m, std::uint64_t seed,
                       std::uint64_t stream0 = 0, unsigned threads = 0,
                       GeneratorScale scale = GeneratorScale::JumpProcess);

/// L^1 decay of Q_t f for mean-zero f: records ||Q_t f||_1 and the
/// (1+t)^a-compensated values at the given times, fits the log-log slope.
struct SemigroupDecay {
  std::vector<double> times;
  std::vector<double> l1;
  std::vector<double> compensated;  // l1 * (1+t)^a
  double fitted_slope = 0.0;
  double slope_se = 0.0;
  double ba_norm_initial = 0.0;
};
SemigroupDecay semigroup_decay(const KineticField& f0,
                               const model::DispersionModel& m, double a,
                               const std::vector<double>& times, double dt);

/// Resolvent building blocks of the rank-2 reduction at complex lambda.
struct ResolventRecord {
  cplx lambda;
  cplx a, a_plus, a_minus;   // a(lambda), a_{+1}, a_{-1}
  cplx b_plus, b_minus;
  cplx delta;                // det of the 2x2 system = a^2 - a_+ a_-
  cplx delta_identity;       // lambda [lambda b_- b_+ + b_- a_+ + a_- b_+]
  cplx D;                    // delta / lambda
};
ResolventRecord resolvent_system(cplx lambda);

/// min over the rectangle boundary (-M,0) x (-rho, rho) of |Delta|/|lambda|;
/// positive value certifies the contour used by the decay estimates.
double resolvent_contour_margin(double rho, int n_samples = 400);

/// Limit profile: W0bar * exp(-c |p|^{3/2} t) (unpinned) or
/// W0bar * exp(-c p^2 t) (pinned).
cplx fractional_profile(cplx W0bar, double p, double t, bool pinned,
                        double c_hat);

/// Deterministic extraction of the macroscopic decay coefficient: evolve a
/// flat-in-k field at p_eff = p N^{-1/(stable:3/2->2/3; pinned:1/2 exponent)}
/// to time N t and fit -log(mass ratio) / (|p|^b t). An independent,
/// noise-free arbiter for the Monte Carlo constant.
struct KineticChatFit {
  std::vector<double> p;
  std::vector<double> c_hat;  // per p
};
KineticChatFit kinetic_c_hat_fit(const model::DispersionModel& m, double N,
                                 double t, const std::vector<double>& p_list,
                                 int grid_cells = 192, double dt = 0.1);

}  // namespace kinchain::kinetic
