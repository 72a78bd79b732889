#include "kinchain/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kinchain::stats {

Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  if (m.n == 0) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / m.n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    double d = x - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  if (m.n > 1) m.var = m2 / (m.n - 1);
  double m2n = m2 / m.n;
  if (m2n > 0.0) m.excess_kurtosis = (m4 / m.n) / (m2n * m2n) - 3.0;
  m.mean_stderr = std::sqrt(m.var / m.n);
  if (m.n > 1) m.var_stderr = m.var * std::sqrt(2.0 / (m.n - 1));
  m.kurtosis_stderr = std::sqrt(24.0 / m.n);
  return m;
}

namespace {
double gamma_p_series(double a, double x) {
  double ap = a, sum = 1.0 / a, del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}
}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi2_sf(double stat, int df) {
  if (stat <= 0.0) return 1.0;
  return 1.0 - gamma_p(0.5 * df, 0.5 * stat);
}

double chi2_statistic(const std::vector<std::size_t>& counts,
                      const std::vector<double>& probs, std::size_t n_total) {
  if (counts.size() != probs.size())
    throw std::invalid_argument("chi2_statistic: size mismatch");
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double expected = probs[i] * static_cast<double>(n_total);
    if (expected <= 0.0) continue;
    double d = counts[i] - expected;
    stat += d * d / expected;
  }
  return stat;
}

double ks_statistic(std::vector<double> samples,
                    const std::vector<double>& cdf_at_sorted) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  if (cdf_at_sorted.size() != n)
    throw std::invalid_argument("ks_statistic: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = cdf_at_sorted[i];
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

WilsonInterval wilson(std::size_t successes, std::size_t n, double z) {
  WilsonInterval w{};
  if (n == 0) return w;
  double p = static_cast<double>(successes) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  w.p_hat = p;
  w.lo = std::max(0.0, center - half);
  w.hi = std::min(1.0, center + half);
  return w;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>* weights) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 points");
  LineFit f;
  f.n = x.size();
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double w = weights ? (*weights)[i] : 1.0;
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  double det = sw * sxx - sx * sx;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sxx * sy - sx * sxy) / det;
  double rss = 0.0, swt = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double w = weights ? (*weights)[i] : 1.0;
    double r = y[i] - f.intercept - f.slope * x[i];
    rss += w * r * r;
    swt += w;
  }
  if (x.size() > 2) {
    double sigma2 = rss / (swt * (1.0 - 2.0 / x.size()));
    f.slope_stderr = std::sqrt(sigma2 * sw / det);
  }
  return f;
}

std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    if (std::fabs(A[piv][col]) < 1e-300)
      throw std::runtime_error("solve_dense: singular system");
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
    x[i] = s / A[i][i];
  }
  return x;
}

}  // namespace kinchain::stats
