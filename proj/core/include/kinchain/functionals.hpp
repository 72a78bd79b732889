#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kinchain/chain.hpp"
#include "kinchain/limits.hpp"
#include "kinchain/model.hpp"
#include "kinchain/parallel.hpp"

namespace kinchain::functionals {

/// Empirical characteristic function on a p grid. phi(-p) is derived from
/// phi(p) by conjugation, so phi(-p) = phi(p)* holds exactly.
struct CharFnEstimate {
  std::vector<double> p;
  std::vector<std::complex<double>> mean;
  std::vector<std::complex<double>> se;  // componentwise stderr (re, im)
  std::size_t n_samples = 0;

  double abs_se(std::size_t i) const;  // stderr of |mean| (delta method)
};

CharFnEstimate empirical_charfn(const std::vector<double>& samples,
                                const std::vector<double>& p_grid);

/// Z_t^{(N)} = N^{-1/alpha} sum_{n=0}^{[Nt]} Psi(xi_n) along one skeleton
/// path (stationary start unless k0 given).
template <class F>
double partial_sum_functional(std::optional<TorusPoint> k0, F&& psi, double N,
                              double t, double alpha, StreamRng& rng) {
  std::uint64_t terms = static_cast<std::uint64_t>(N * t) + 1;
  TorusPoint k = k0 ? *k0 : chain::sample_stationary(rng);
  double s = 0.0;
  for (std::uint64_t n = 0;; ++n) {
    s += psi(k.k);
    if (n + 1 >= terms) break;
    k = chain::skeleton_step(k, rng);
  }
  return s * std::pow(N, -1.0 / alpha);
}

/// Y_t^{(N)} = N^{-1/beta} int_0^{Nt} V(X_s) ds from a materialized
/// trajectory; the final holding interval is truncated at total_time.
double additive_functional(const chain::JumpTrajectory& traj,
                           const std::function<double(double)>& V, double N,
                           double t, double beta_index);

/// Streaming batch of Y samples: path i uses stream (seed, stream0 + i);
/// results land in slot i, so the ensemble is order independent.
template <class V>
std::vector<double> simulate_y_samples(V&& v, double N, double t, double beta,
                                       std::size_t n_paths, std::uint64_t seed,
                                       std::uint64_t stream0 = 0,
                                       unsigned threads = 0) {
  std::vector<double> out(n_paths);
  const double scale = std::pow(N, -1.0 / beta);
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        StreamRng rng(seed, stream0 + i);
        double acc = 0.0;
        chain::run_jump_process(std::nullopt, N * t, rng,
                                [&](const chain::JumpSegment& s) {
                                  acc += v(s.k.k) * s.dt;
                                });
        out[i] = acc * scale;
      },
      threads);
  return out;
}

template <class F>
std::vector<double> simulate_z_samples(F&& psi, double N, double t, double alpha,
                                       std::size_t n_paths, std::uint64_t seed,
                                       std::uint64_t stream0 = 0,
                                       unsigned threads = 0) {
  std::vector<double> out(n_paths);
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        StreamRng rng(seed, stream0 + i);
        out[i] = partial_sum_functional(std::nullopt, psi, N, t, alpha, rng);
      },
      threads);
  return out;
}

struct StableLimitReport {
  CharFnEstimate charfn;
  std::vector<bool> p_identifiable;    // |phi| >= 10 stderr
  std::vector<double> c_hat_per_p;     // -log|phi| / (t |p|^{3/2})
  std::vector<double> c_hat_per_p_se;
  double c_hat_emp = 0.0;              // inverse-variance weighted
  double c_hat_emp_se = 0.0;
  double max_im_z = 0.0;               // max |Im phi| / stderr over grid
  double vs_pipeline = 0.0;            // c_hat_emp / pipeline - 1
  double vs_formula = 0.0;
  double pipeline = 0.0, formula = 0.0;
  std::size_t n_identifiable = 0;
};

StableLimitReport stable_limit_test(const model::DispersionModel& m, double N,
                                    double t, const std::vector<double>& p_grid,
                                    std::size_t n_paths, std::uint64_t seed,
                                    std::uint64_t stream0 = 0,
                                    unsigned threads = 0);

struct GaussianLimitReport {
  CharFnEstimate charfn;
  double mean = 0.0, mean_se = 0.0;
  double var_rate = 0.0, var_rate_se = 0.0;  // Var(Y_t)/t
  double excess_kurtosis = 0.0, kurtosis_se = 0.0;
  double candidate_a = 0.0, candidate_b = 0.0;  // variances under test
  double green_kubo = 0.0;
  // sup over identifiable p of |phi - target| / stderr, per candidate
  double z_candidate_a = 0.0, z_candidate_b = 0.0, z_green_kubo = 0.0;
  std::string best_candidate;  // "a", "b" or "green-kubo"
};

GaussianLimitReport gaussian_limit_test(const model::DispersionModel& m,
                                        double N, double t,
                                        const std::vector<double>& p_grid,
                                        std::size_t n_paths, std::uint64_t seed,
                                        std::uint64_t stream0 = 0,
                                        unsigned threads = 0);

enum class Regime { StableJump, GaussianJump, StableChain };

struct RateSweepResult {
  std::vector<double> N_ladder;
  std::vector<double> error;      // |phi_N(p) - target(p)|, floor-debiased
  std::vector<double> stderr_;
  std::vector<bool> identifiable; // error above 3 stderr
  double slope = 0.0, slope_se = 0.0;
  bool slope_identifiable = false;
  double delta_guarantee = 0.0;   // theoretical bound used for comparison
  bool nonincreasing = true;      // up to 2 stderr slack
};

/// Error against the arbitrated limit target exp(-c_arb |p|^beta' t) at one
/// p, over the N ladder. For the stable regime beta' = 3/2 and c_arb is the
/// Monte Carlo fitted coefficient; for the gaussian regime the target is
/// exp(-v p^2 t / 2) with v the arbitrated variance rate.
RateSweepResult rate_sweep(Regime regime, const model::DispersionModel& m,
                           const std::vector<double>& N_ladder, double p,
                           double t, std::size_t n_paths, double c_arb,
                           std::uint64_t seed, std::uint64_t stream0 = 0,
                           unsigned threads = 0);

struct TailProbabilityPoint {
  double N = 0.0;
  std::size_t exceed = 0, n = 0;
  double freq = 0.0, lo = 0.0, hi = 0.0;  // Wilson interval
};

TailProbabilityPoint tail_probability_check(const model::DispersionModel& m,
                                            double N, double t, double kappa,
                                            std::size_t n_paths,
                                            std::uint64_t seed,
                                            std::uint64_t stream0 = 0,
                                            unsigned threads = 0);

struct TailProbabilityFit {
  std::vector<TailProbabilityPoint> points;
  double delta = 0.0, delta_se = 0.0;  // freq ~ C (t+1) / N^delta
  bool positive_at_95 = false;
  bool nonincreasing = true;  // up to interval overlap
};

TailProbabilityFit tail_probability_sweep(const model::DispersionModel& m,
                                          const std::vector<double>& N_ladder,
                                          double t, double kappa,
                                          std::size_t n_paths,
                                          std::uint64_t seed,
                                          std::uint64_t stream0 = 0,
                                          unsigned threads = 0);

/// Exact martingale + boundary split of the partial sum over a path:
/// sum_{n=0}^{K-1} Psi(xi_n) = M + chi(xi_0) - chi(xi_K) with
/// M = sum_{n=1}^{K} [chi(xi_n) - P chi(xi_{n-1})].
struct MartingaleParts {
  double martingale = 0.0;
  double boundary = 0.0;
  double partial_sum = 0.0;  // sum over the first K states
};
MartingaleParts martingale_decompose(const std::vector<TorusPoint>& path,
                                     const limits::PoissonSolution& chi);

}  // namespace kinchain::functionals
