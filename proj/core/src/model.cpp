#include "kinchain/model.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kinchain/stats.hpp"

namespace kinchain::model {

// ---------------------------------------------------------------- spline

EvenSpline::EvenSpline(std::vector<double> k, std::vector<double> v) {
  if (k.size() != v.size() || k.size() < 4)
    throw std::invalid_argument("EvenSpline: need >= 4 samples");
  // fold onto [0, 1/2] using evenness, sort, dedupe
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < k.size(); ++i)
    pts.emplace_back(std::fabs(TorusPoint::wrap(k[i]).k), v[i]);
  std::sort(pts.begin(), pts.end());
  for (auto& p : pts) {
    if (!k_.empty() && std::fabs(p.first - k_.back()) < 1e-12) continue;
    k_.push_back(p.first);
    v_.push_back(p.second);
  }
  if (k_.front() > 1e-9 || k_.back() < 0.5 - 1e-9)
    throw std::invalid_argument("EvenSpline: table must cover [0, 1/2]");
  const std::size_t n = k_.size();
  // natural spline with even reflection at 0 (zero first derivative) and
  // at 1/2 (periodic even extension): enforce via zero-slope end conditions
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  A[0][0] = 2.0 * (k_[1] - k_[0]);
  A[0][1] = k_[1] - k_[0];
  b[0] = 6.0 * ((v_[1] - v_[0]) / (k_[1] - k_[0]));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double h0 = k_[i] - k_[i - 1], h1 = k_[i + 1] - k_[i];
    A[i][i - 1] = h0;
    A[i][i] = 2.0 * (h0 + h1);
    A[i][i + 1] = h1;
    b[i] = 6.0 * ((v_[i + 1] - v_[i]) / h1 - (v_[i] - v_[i - 1]) / h0);
  }
  double hl = k_[n - 1] - k_[n - 2];
  A[n - 1][n - 2] = hl;
  A[n - 1][n - 1] = 2.0 * hl;
  b[n - 1] = -6.0 * ((v_[n - 1] - v_[n - 2]) / hl);
  m_ = stats::solve_dense(std::move(A), std::move(b));
}

double EvenSpline::value(double k) const {
  double kk = std::fabs(TorusPoint::wrap(k).k);
  auto it = std::upper_bound(k_.begin(), k_.end(), kk);
  std::size_t i = std::min(k_.size() - 2,
                           static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                               0, (it - k_.begin()) - 1)));
  double h = k_[i + 1] - k_[i];
  double a = (k_[i + 1] - kk) / h, bb = (kk - k_[i]) / h;
  return a * v_[i] + bb * v_[i + 1] +
         ((a * a * a - a) * m_[i] + (bb * bb * bb - bb) * m_[i + 1]) * h * h / 6.0;
}

double EvenSpline::derivative(double k) const {
  double kw = TorusPoint::wrap(k).k;
  double sign = kw < 0 ? -1.0 : 1.0;
  double kk = std::fabs(kw);
  auto it = std::upper_bound(k_.begin(), k_.end(), kk);
  std::size_t i = std::min(k_.size() - 2,
                           static_cast<std::size_t>(std::max<std::ptrdiff_t>(
                               0, (it - k_.begin()) - 1)));
  double h = k_[i + 1] - k_[i];
  double a = (k_[i + 1] - kk) / h, bb = (kk - k_[i]) / h;
  double d = (v_[i + 1] - v_[i]) / h -
             (3.0 * a * a - 1.0) / 6.0 * h * m_[i] +
             (3.0 * bb * bb - 1.0) / 6.0 * h * m_[i + 1];
  return sign * d;
}

// ----------------------------------------------------------- dispersion

DispersionModel DispersionModel::unpinned_nn() {
  DispersionModel m;
  m.family_ = Family::UnpinnedNN;
  m.pinning_mass_ = 0.0;
  m.alpha2_0_ = 8.0 * M_PI * M_PI;
  m.validate();
  return m;
}

DispersionModel DispersionModel::pinned_nn(double pinning_mass) {
  if (pinning_mass <= 0.0)
    throw std::invalid_argument("pinned_nn: pinning mass must be > 0");
  DispersionModel m;
  m.family_ = Family::PinnedNN;
  m.pinning_mass_ = pinning_mass;
  m.alpha2_0_ = 8.0 * M_PI * M_PI;
  m.validate();
  return m;
}

DispersionModel DispersionModel::custom(std::vector<double> k,
                                        std::vector<double> alpha) {
  DispersionModel m;
  m.family_ = Family::Custom;
  m.table_ = std::make_shared<EvenSpline>(std::move(k), std::move(alpha));
  double a0 = m.table_->value(0.0);
  if (a0 < 0.0) throw std::invalid_argument("custom: alpha_hat(0) < 0");
  m.pinning_mass_ = a0 > 1e-12 ? std::sqrt(a0) : 0.0;
  // alpha_hat''(0) by central differences on the spline
  double h = 1e-3;
  m.alpha2_0_ =
      (m.table_->value(h) - 2.0 * a0 + m.table_->value(-h)) / (h * h);
  m.validate();
  return m;
}

DispersionModel DispersionModel::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open custom table: " + path);
  std::vector<double> ks, vs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double k, a;
    if (row >> k >> a) {
      ks.push_back(k);
      vs.push_back(a);
    }
  }
  return custom(std::move(ks), std::move(vs));
}

void DispersionModel::validate() const {
  // a2): even, positive away from 0; if unpinned then alpha''(0) > 0
  for (double k : {0.07, 0.19, 0.33, 0.5}) {
    double v = alpha_hat(TorusPoint{k});
    if (v <= 0.0) throw std::invalid_argument("alpha_hat must be > 0 for k != 0");
    if (std::fabs(v - alpha_hat(TorusPoint{-k})) > 1e-9 * std::max(1.0, v))
      throw std::invalid_argument("alpha_hat must be even");
  }
  if (!pinned() && alpha2_0_ <= 0.0)
    throw std::invalid_argument("unpinned model needs alpha_hat''(0) > 0");
}

double DispersionModel::alpha_hat(TorusPoint k) const {
  double s = std::sin(M_PI * k.k);
  switch (family_) {
    case Family::UnpinnedNN: return 4.0 * s * s;
    case Family::PinnedNN: return pinning_mass_ * pinning_mass_ + 4.0 * s * s;
    case Family::Custom: return std::max(0.0, table_->value(k.k));
  }
  return 0.0;
}

double DispersionModel::omega_prime(TorusPoint k) const {
  if (family_ == Family::UnpinnedNN) {
    if (k.k == 0.0) return 0.0;
    double sgn = k.k > 0 ? 1.0 : -1.0;
    return 2.0 * M_PI * std::cos(M_PI * k.k) * sgn;
  }
  if (family_ == Family::PinnedNN) {
    // alpha' / (2 omega) with alpha' = 4 pi sin(2 pi k)
    return 2.0 * M_PI * std::sin(2.0 * M_PI * k.k) / omega(k);
  }
  if (k.k == 0.0) return 0.0;
  double w = omega(k);
  if (w <= 0.0) return 0.0;
  return table_->derivative(k.k) / (2.0 * w);
}

std::string DispersionModel::family_name() const {
  switch (family_) {
    case Family::UnpinnedNN: return "unpinned-nn";
    case Family::PinnedNN: return "pinned-nn";
    case Family::Custom: return "custom";
  }
  return "?";
}

// ------------------------------------------------------------- kernels

double beta_hat(double k) {
  double s = std::sin(M_PI * k), c = std::cos(M_PI * k);
  return 8.0 * s * s * (1.0 + 2.0 * c * c);
}

double r_elementary(double k, double kp) {
  return 4.0 * std::sin(M_PI * k) * std::sin(M_PI * (k - kp)) *
         std::sin((2.0 * k - kp) * M_PI);
}

double R_kernel(double k, double kp) {
  double sk = std::sin(M_PI * k), skp = std::sin(M_PI * kp);
  double sp = std::sin(M_PI * (k + kp)), sm = std::sin(M_PI * (k - kp));
  return 8.0 * sk * sk * skp * skp * (sp * sp + sm * sm);
}

double R_eps_kernel(double p, double k, double kp, double eps) {
  double s = 0.0;
  for (int iota : {-1, 1}) {
    double target = k + iota * kp;
    s += r_elementary(k - 0.5 * eps * p, target) *
         r_elementary(k + 0.5 * eps * p, target);
  }
  return 0.5 * s;
}

double e_plus(double k) {
  double s = std::sin(M_PI * k);
  return (8.0 / 3.0) * s * s * s * s;
}

double e_minus(double k) {
  double s = std::sin(2.0 * M_PI * k);
  return 2.0 * s * s;
}

double r_total(double k) { return e_plus(k) + e_minus(k); }

double R_total(double k) {
  double s = std::sin(M_PI * k), c = std::cos(M_PI * k);
  return 2.0 * s * s * (1.0 + 2.0 * c * c);
}

double theta(double k) {
  double R = R_total(k);
  return R > 0.0 ? 1.0 / R : std::numeric_limits<double>::infinity();
}

ScatteringTables scattering_tables(const DispersionModel& model) {
  (void)model;  // tables are model independent; signature keeps the contract
  return ScatteringTables{};
}

}  // namespace kinchain::model
