#pragma once

#include <cstddef>
#include <vector>

namespace kinchain::stats {

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;       // unbiased
  double excess_kurtosis = 0.0;
  double mean_stderr = 0.0;
  double var_stderr = 0.0;        // normal-theory sqrt(2/(n-1)) * var
  double kurtosis_stderr = 0.0;   // sqrt(24/n)
};
Moments moments(const std::vector<double>& xs);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Upper tail of the chi-squared distribution with df degrees of freedom.
double chi2_sf(double stat, int df);

/// Pearson chi-squared GOF statistic of counts against probabilities
/// (counts and probs must have equal size, probs summing to ~1).
double chi2_statistic(const std::vector<std::size_t>& counts,
                      const std::vector<double>& probs, std::size_t n_total);

/// Two-sided Kolmogorov-Smirnov statistic of samples against a CDF table
/// evaluated at the sorted samples.
double ks_statistic(std::vector<double> samples,
                    const std::vector<double>& cdf_at_sorted);

struct WilsonInterval {
  double p_hat, lo, hi;
};
WilsonInterval wilson(std::size_t successes, std::size_t n, double z = 1.96);

struct LineFit {
  double slope = 0.0, intercept = 0.0;
  double slope_stderr = 0.0;
  std::size_t n = 0;
};
/// Ordinary least squares y = a + b x, with optional per-point weights.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>* weights = nullptr);

/// Solve the n x n system A x = b in place (partial pivoting); n is tiny.
std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                std::vector<double> b);

}  // namespace kinchain::stats
