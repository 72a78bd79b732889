#include "kinchain/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinchain/stats.hpp"

namespace kinchain::functionals {

double CharFnEstimate::abs_se(std::size_t i) const {
  double a = std::abs(mean[i]);
  if (a == 0.0) return std::max(se[i].real(), se[i].imag());
  double re = mean[i].real(), im = mean[i].imag();
  return std::sqrt(re * re * se[i].real() * se[i].real() +
                   im * im * se[i].imag() * se[i].imag()) /
         a;
}

CharFnEstimate empirical_charfn(const std::vector<double>& samples,
                                const std::vector<double>& p_grid) {
  if (samples.size() < 100)
    throw std::invalid_argument("empirical_charfn: need >= 100 samples");
  CharFnEstimate est;
  est.p = p_grid;
  est.n_samples = samples.size();
  est.mean.resize(p_grid.size());
  est.se.resize(p_grid.size());
  const double n = static_cast<double>(samples.size());
  for (std::size_t j = 0; j < p_grid.size(); ++j) {
    double p = p_grid[j];
    if (p == 0.0) {
      est.mean[j] = {1.0, 0.0};
      est.se[j] = {0.0, 0.0};
      continue;
    }
    double ap = std::fabs(p);
    double sc = 0, ss = 0, sc2 = 0, ss2 = 0;
    for (double y : samples) {
      double c = std::cos(ap * y), s = std::sin(ap * y);
      sc += c;
      ss += s;
      sc2 += c * c;
      ss2 += s * s;
    }
    double mc = sc / n, ms = ss / n;
    double vc = std::max(0.0, sc2 / n - mc * mc);
    double vs = std::max(0.0, ss2 / n - ms * ms);
    std::complex<double> mean{mc, ms}, se{std::sqrt(vc / n), std::sqrt(vs / n)};
    if (p < 0.0) mean = std::conj(mean);  // phi(-p) = phi(p)* exactly
    est.mean[j] = mean;
    est.se[j] = se;
  }
  return est;
}

double additive_functional(const chain::JumpTrajectory& traj,
                           const std::function<double(double)>& V, double N,
                           double t, double beta_index) {
  if (std::fabs(traj.total_time - N * t) > 1e-9 * std::max(1.0, N * t))
    throw std::invalid_argument(
        "additive_functional: trajectory total_time does not equal N*t");
  double acc = 0.0, elapsed = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    double dt = std::min(traj.holds[i], traj.total_time - elapsed);
    acc += V(traj.states[i].k) * dt;
    elapsed += traj.holds[i];
    if (elapsed >= traj.total_time) break;
  }
  return acc * std::pow(N, -1.0 / beta_index);
}

namespace {
std::vector<double> omega_prime_samples(const model::DispersionModel& m,
                                        double N, double t, double beta,
                                        std::size_t n_paths, std::uint64_t seed,
                                        std::uint64_t stream0, unsigned threads) {
  return simulate_y_samples(
      [&m](double k) { return m.omega_prime(TorusPoint{k}); }, N, t, beta,
      n_paths, seed, stream0, threads);
}
}  // namespace

StableLimitReport stable_limit_test(const model::DispersionModel& m, double N,
                                    double t, const std::vector<double>& p_grid,
                                    std::size_t n_paths, std::uint64_t seed,
                                    std::uint64_t stream0, unsigned threads) {
  if (m.pinned())
    throw std::invalid_argument("stable_limit_test: unpinned model required");
  if (n_paths < 100) throw std::invalid_argument("stable_limit_test: n_paths");
  StableLimitReport rep;
  auto ys = omega_prime_samples(m, N, t, 1.5, n_paths, seed, stream0, threads);
  rep.charfn = empirical_charfn(ys, p_grid);
  rep.c_hat_per_p.assign(p_grid.size(), 0.0);
  rep.c_hat_per_p_se.assign(p_grid.size(), 0.0);
  rep.p_identifiable.assign(p_grid.size(), false);
  double wsum = 0.0, wval = 0.0;
  for (std::size_t j = 0; j < p_grid.size(); ++j) {
    double p = p_grid[j];
    if (p == 0.0) continue;
    double a = std::abs(rep.charfn.mean[j]);
    double se_ab = rep.charfn.abs_se(j);
    double imz = std::fabs(rep.charfn.mean[j].imag()) /
                 std::max(1e-300, rep.charfn.se[j].imag());
    rep.max_im_z = std::max(rep.max_im_z, imz);
    bool ok = a >= 10.0 * std::max(rep.charfn.se[j].real(), rep.charfn.se[j].imag());
    rep.p_identifiable[j] = ok;
    if (!ok) continue;
    ++rep.n_identifiable;
    double denom = t * std::pow(std::fabs(p), 1.5);
    double c = -std::log(a) / denom;
    double cse = se_ab / (a * denom);
    rep.c_hat_per_p[j] = c;
    rep.c_hat_per_p_se[j] = cse;
    double w = 1.0 / (cse * cse);
    wsum += w;
    wval += w * c;
  }
  if (rep.n_identifiable == 0)
    throw std::runtime_error(
        "stable_limit_test: |phi| < 10 stderr on the whole grid (p too large "
        "for this N)");
  rep.c_hat_emp = wval / wsum;
  rep.c_hat_emp_se = std::sqrt(1.0 / wsum);
  auto pc = limits::stable_c_hat_pipeline(m);
  rep.pipeline = pc.c_hat;
  rep.formula = limits::stable_c_hat_formula(m);
  rep.vs_pipeline = rep.c_hat_emp / rep.pipeline - 1.0;
  rep.vs_formula = rep.c_hat_emp / rep.formula - 1.0;
  return rep;
}

GaussianLimitReport gaussian_limit_test(const model::DispersionModel& m,
                                        double N, double t,
                                        const std::vector<double>& p_grid,
                                        std::size_t n_paths, std::uint64_t seed,
                                        std::uint64_t stream0, unsigned threads) {
  if (!m.pinned())
    throw std::invalid_argument("gaussian_limit_test: pinned model required");
  GaussianLimitReport rep;
  auto ys = omega_prime_samples(m, N, t, 2.0, n_paths, seed, stream0, threads);
  rep.charfn = empirical_charfn(ys, p_grid);
  auto mom = stats::moments(ys);
  rep.mean = mom.mean;
  rep.mean_se = mom.mean_stderr;
  rep.var_rate = mom.var / t;
  rep.var_rate_se = mom.var_stderr / t;
  rep.excess_kurtosis = mom.excess_kurtosis;
  rep.kurtosis_se = mom.kurtosis_stderr;
  auto g = limits::gaussian_c_hats(m);
  rep.candidate_a = g.candidate_a;
  rep.candidate_b = g.candidate_b;
  rep.green_kubo = g.green_kubo_var_rate;
  auto sup_z = [&](double v) {
    double z = 0.0;
    for (std::size_t j = 0; j < p_grid.size(); ++j) {
      double p = p_grid[j];
      if (p == 0.0) continue;
      double a = std::abs(rep.charfn.mean[j]);
      double se_ab = std::max(1e-300, rep.charfn.abs_se(j));
      if (a < 10.0 * se_ab) continue;
      double target = std::exp(-0.5 * v * p * p * t);
      z = std::max(z, std::fabs(a - target) / se_ab);
    }
    return z;
  };
  rep.z_candidate_a = sup_z(rep.candidate_a);
  rep.z_candidate_b = sup_z(rep.candidate_b);
  rep.z_green_kubo = sup_z(rep.green_kubo);
  rep.best_candidate = rep.z_candidate_a < rep.z_candidate_b ? "a" : "b";
  if (rep.z_green_kubo < std::min(rep.z_candidate_a, rep.z_candidate_b))
    rep.best_candidate = "green-kubo";
  return rep;
}

RateSweepResult rate_sweep(Regime regime, const model::DispersionModel& m,
                           const std::vector<double>& N_ladder, double p,
                           double t, std::size_t n_paths, double c_arb,
                           std::uint64_t seed, std::uint64_t stream0,
                           unsigned threads) {
  if (N_ladder.size() < 4)
    throw std::invalid_argument("rate_sweep: ladder length >= 4 required");
  RateSweepResult res;
  res.N_ladder = N_ladder;
  std::complex<double> target;
  if (regime == Regime::StableJump || regime == Regime::StableChain) {
    target = std::exp(-c_arb * std::pow(std::fabs(p), 1.5) * t);
    // alpha = alpha_2 = 3/2: delta* = min[3/5, 2/13]
    res.delta_guarantee = 2.0 / 13.0;
  } else {
    target = std::exp(-0.5 * c_arb * p * p * t);
    // Berry-Esseen-type guarantee used by the acceptance gate
    res.delta_guarantee = 0.25;
  }
  std::vector<double> logN, logE, wts;
  double prev_err = -1.0, prev_se = 0.0;
  std::uint64_t stream = stream0;
  for (double N : N_ladder) {
    std::vector<double> ys;
    if (regime == Regime::StableChain) {
      limits::Observable psi{&m};
      ys = simulate_z_samples([&](double k) { return psi(k); }, N, t, 1.5,
                              n_paths, seed, stream, threads);
    } else {
      double beta = regime == Regime::StableJump ? 1.5 : 2.0;
      ys = omega_prime_samples(m, N, t, beta, n_paths, seed, stream, threads);
    }
    stream += n_paths;
    auto est = empirical_charfn(ys, {p});
    double err = std::abs(est.mean[0] - target);
    double se = std::max(est.se[0].real(), est.se[0].imag());
    // subtract the Monte Carlo floor when it is within 10x of the signal
    if (err < 10.0 * se) err = std::sqrt(std::max(0.0, err * err - se * se));
    bool ident = err > 3.0 * se;
    res.error.push_back(err);
    res.stderr_.push_back(se);
    res.identifiable.push_back(ident);
    if (prev_err >= 0.0 && err > prev_err + 2.0 * (se + prev_se))
      res.nonincreasing = false;
    prev_err = err;
    prev_se = se;
    if (ident) {
      logN.push_back(std::log(N));
      logE.push_back(std::log(err));
      wts.push_back(1.0);
    }
  }
  if (logN.size() >= 3) {
    auto fit = stats::fit_line(logN, logE, &wts);
    res.slope = fit.slope;
    res.slope_se = fit.slope_stderr;
    res.slope_identifiable = true;
  }
  return res;
}

TailProbabilityPoint tail_probability_check(const model::DispersionModel& m,
                                            double N, double t, double kappa,
                                            std::size_t n_paths,
                                            std::uint64_t seed,
                                            std::uint64_t stream0,
                                            unsigned threads) {
  if (kappa <= 0.0) throw std::invalid_argument("tail_probability: kappa > 0");
  limits::Observable psi{&m};
  double alpha = psi.alpha();
  auto zs = simulate_z_samples([&](double k) { return psi(k); }, N, t, alpha,
                               n_paths, seed, stream0, threads);
  TailProbabilityPoint pt;
  pt.N = N;
  pt.n = n_paths;
  double thr = std::pow(N, kappa);
  for (double z : zs)
    if (std::fabs(z) >= thr) ++pt.exceed;
  auto w = stats::wilson(pt.exceed, pt.n);
  pt.freq = w.p_hat;
  pt.lo = w.lo;
  pt.hi = w.hi;
  return pt;
}

TailProbabilityFit tail_probability_sweep(const model::DispersionModel& m,
                                          const std::vector<double>& N_ladder,
                                          double t, double kappa,
                                          std::size_t n_paths,
                                          std::uint64_t seed,
                                          std::uint64_t stream0,
                                          unsigned threads) {
  TailProbabilityFit fit;
  std::uint64_t stream = stream0;
  for (double N : N_ladder) {
    fit.points.push_back(
        tail_probability_check(m, N, t, kappa, n_paths, seed, stream, threads));
    stream += n_paths;
  }
  for (std::size_t i = 1; i < fit.points.size(); ++i)
    if (fit.points[i].lo > fit.points[i - 1].hi) fit.nonincreasing = false;
  std::vector<double> x, y, w;
  for (const auto& pt : fit.points) {
    if (pt.exceed == 0) continue;
    x.push_back(std::log(pt.N));
    y.push_back(std::log(pt.freq));
    // binomial log-frequency variance ~ (1-p)/(n p)
    w.push_back(pt.n * pt.freq / std::max(1e-12, 1.0 - pt.freq));
  }
  if (x.size() >= 3) {
    auto lf = stats::fit_line(x, y, &w);
    fit.delta = -lf.slope;
    fit.delta_se = lf.slope_stderr;
    fit.positive_at_95 = fit.delta - 1.645 * fit.delta_se > 0.0;
  }
  return fit;
}

MartingaleParts martingale_decompose(const std::vector<TorusPoint>& path,
                                     const limits::PoissonSolution& chi) {
  if (path.size() < 2)
    throw std::invalid_argument("martingale_decompose: need >= 2 states");
  MartingaleParts parts;
  for (std::size_t n = 1; n < path.size(); ++n)
    parts.martingale += chi.chi(path[n].k) - chi.P_chi(path[n - 1].k);
  parts.boundary = chi.chi(path.front().k) - chi.chi(path.back().k);
  for (std::size_t n = 0; n + 1 < path.size(); ++n)
    parts.partial_sum += chi.psi(path[n].k);
  return parts;
}

}  // namespace kinchain::functionals
