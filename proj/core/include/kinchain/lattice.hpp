#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kinchain/model.hpp"
#include "kinchain/rng.hpp"

namespace kinchain::lattice {

using cplx = std::complex<double>;

/// Gaussian wave packet in mode space: envelope exp(-d(k,k*)^2 / 4 sigma_k^2)
/// with sigma_k = eps / (2 pi width_macro), localized at x_star (fraction of
/// the macroscopic box eps*L), total mass scaled so that
/// eps^{1+gamma} sum |psi|^2 = mass. One random global phase per realization.
struct PacketSpec {
  double k_star = 0.2;
  double x_star_frac = 0.5;
  double width_macro = 5.0;
  double mass = 2.0;
  double gamma = 0.0;
};

struct LatticeState {
  int L = 0;
  double eps = 0.0;
  double clock = 0.0;  // microscopic time
  std::vector<double> p, q;

  double momentum() const;
  /// Total energy (1/2) sum p^2 + (1/2) sum alpha(y-y') q_y q_{y'},
  /// evaluated spectrally.
  double energy(const model::DispersionModel& m) const;
};

LatticeState init_state(const model::DispersionModel& m, int L, double eps,
                        const PacketSpec& spec, StreamRng& rng);

/// Exact free evolution: per-mode rotation of (q_hat, p_hat) with angle
/// omega(k) h, via forward/inverse FFT. Energy-preserving up to rounding.
void step_harmonic(LatticeState& s, const model::DispersionModel& m, double h);

/// Conservative noise: sites are partitioned into classes whose triples
/// (p_{x-1}, p_x, p_{x+1}) are disjoint (x mod 3; the 1-2 leftover sites at
/// the periodic seam get singleton classes). Each site applies the exact
/// Rodrigues rotation about (1,1,1)/sqrt(3) with angle -sqrt(3 eps) dW,
/// classes composed in symmetric (Strang) order with half-step increments.
void step_noise(LatticeState& s, double h, StreamRng& rng);

/// Strang splitting harmonic/noise for t_micro more time units (interior
/// harmonic half-steps merged).
void evolve(LatticeState& s, const model::DispersionModel& m, double t_micro,
            double h, StreamRng& rng);

struct LatticeEnsemble {
  const model::DispersionModel* m = nullptr;
  int L = 0;
  double eps = 0.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::vector<LatticeState> states;
  /// one persistent noise stream per realization, so repeated evolve calls
  /// continue the same Brownian paths
  std::vector<StreamRng> noise_rngs;
};

LatticeEnsemble init_ensemble(const model::DispersionModel& m, int L, double eps,
                              const PacketSpec& spec, int n_realizations,
                              std::uint64_t seed, std::uint64_t stream0 = 0,
                              unsigned threads = 0);

void evolve_ensemble(LatticeEnsemble& ens, double t_micro, double h,
                     unsigned threads = 0);

/// Averaged Wigner values (eps^{1+gamma}/2) <psi^*(k - m/L) psi(k + m/L)> on
/// the lattice mode grid, for the given integer shifts m (i.e. p = 2m/(eps L)).
struct WignerEstimate {
  int L = 0;
  double eps = 0.0, gamma = 0.0, t_macro = 0.0;
  std::vector<int> shifts;
  std::vector<double> p;                    // 2 m / (eps L)
  std::vector<double> k;                    // j/L in [-1/2, 1/2)
  std::vector<std::vector<cplx>> mean;      // [shift][k index]
  std::vector<std::vector<cplx>> se;        // componentwise stderr
  std::size_t n_realizations = 0;
};

WignerEstimate wigner_estimate(const LatticeEnsemble& ens,
                               const std::vector<int>& shifts,
                               unsigned threads = 0);

/// Test functions are separable tables J(p, k) evaluated on the estimate's
/// own (p, k) grid.
using TestFunction = std::function<cplx(double p, double k)>;

/// Discrete pairing  sum_m dp sum_j (1/L) W(p_m, k_j) J^*(p_m, k_j)  of the
/// ensemble-mean field (dp = 2/(eps L) for consecutive shifts).
cplx pair_with_test_function(const WignerEstimate& w, const TestFunction& J);

/// Discrete L1 norm of J on the same grid (the scale for tolerances).
double test_function_norm(const WignerEstimate& w, const TestFunction& J);

struct PairingStats {
  cplx mean;
  cplx se;
};
/// Per-realization pairings, giving an honest Monte Carlo stderr.
std::vector<PairingStats> ensemble_pairings(const LatticeEnsemble& ens,
                                            const std::vector<int>& shifts,
                                            const std::vector<TestFunction>& Js,
                                            unsigned threads = 0);

/// E[dp] on a frozen state over n noise draws, against the expected Ito
/// drift -(eps/2) (beta * p) h.
struct DriftCheck {
  std::vector<double> measured;   // E[dp_x] / h
  std::vector<double> expected;   // -(eps/2) (beta * p)_x
  std::vector<double> se;         // stderr of measured
  double max_abs_defect = 0.0;
  double tolerance = 0.0;         // O(h) bound + 3 stderr allowance
  bool pass = false;
};
DriftCheck noise_drift_check(const LatticeState& frozen, double h,
                             std::size_t n_draws, std::uint64_t seed,
                             unsigned threads = 0);

void save_checkpoint(const LatticeState& s, const std::string& path_prefix,
                     const model::DispersionModel& m, std::uint64_t seed);
LatticeState load_checkpoint(const std::string& path_prefix);

}  // namespace kinchain::lattice
