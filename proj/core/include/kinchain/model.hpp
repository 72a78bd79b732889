#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "kinchain/torus.hpp"

namespace kinchain::model {

enum class Family { UnpinnedNN, PinnedNN, Custom };

/// Even periodic cubic spline on [-1/2, 1/2], used by the custom-table
/// dispersion family.
class EvenSpline {
 public:
  EvenSpline(std::vector<double> k, std::vector<double> v);
  double value(double k) const;
  double derivative(double k) const;

 private:
  std::vector<double> k_, v_, m_;  // nodes on [0, 1/2], values, second derivs
};

/// Dispersion data: alpha_hat (Fourier transform of the interaction
/// potential), omega = sqrt(alpha_hat), and omega'. The pinned/unpinned
/// branch is decided by alpha_hat(0).
class DispersionModel {
 public:
  static DispersionModel unpinned_nn();
  static DispersionModel pinned_nn(double pinning_mass);
  /// Table of (k, alpha_hat) samples; validated for evenness/positivity.
  static DispersionModel custom(std::vector<double> k, std::vector<double> alpha);
  static DispersionModel from_csv(const std::string& path);

  Family family() const { return family_; }
  bool pinned() const { return pinning_mass_ > 0.0; }
  double pinning_mass() const { return pinning_mass_; }
  double alpha_hat_second_deriv_at_zero() const { return alpha2_0_; }

  double alpha_hat(TorusPoint k) const;
  double omega(TorusPoint k) const { return std::sqrt(alpha_hat(k)); }
  /// Odd; omega'(0) := 0 by convention in the unpinned case.
  double omega_prime(TorusPoint k) const;

  std::string family_name() const;

 private:
  Family family_ = Family::UnpinnedNN;
  double pinning_mass_ = 0.0;
  double alpha2_0_ = 0.0;
  std::shared_ptr<const EvenSpline> table_;
  void validate() const;
};

// --- noise scattering kernels (model independent; they come from the
// --- conservative noise, not from the potential) ---

/// 8 sin^2(pi k) [1 + 2 cos^2(pi k)]
double beta_hat(double k);

/// 4 sin(pi k) sin(pi(k-k')) sin((2k-k')pi); equals the three-sine sum form.
double r_elementary(double k, double kp);

/// 8 sin^2(pi k) sin^2(pi k') { sin^2(pi(k+k')) + sin^2(pi(k-k')) }
double R_kernel(double k, double kp);

/// R_eps(p,k,k') = (1/2) sum_{i=+-1} r(k-eps p/2, k+i k') r(k+eps p/2, k+i k');
/// reduces to R_kernel at eps = 0 or p = 0.
double R_eps_kernel(double p, double k, double kp, double eps);

double e_plus(double k);    // (8/3) sin^4(pi k)
double e_minus(double k);   // 2 sin^2(2 pi k)
double r_total(double k);   // e_plus + e_minus
double R_total(double k);   // (3/4) r_total = 2 sin^2(pi k)[1 + 2cos^2(pi k)]
double theta(double k);     // 1 / R_total (mean jump time; +inf at k = 0)

/// The closed-form scattering functions bundled as evaluable tables.
struct ScatteringTables {
  double e1(TorusPoint k) const { return e_plus(k.k); }
  double em1(TorusPoint k) const { return e_minus(k.k); }
  double r(TorusPoint k) const { return r_total(k.k); }
  double R(TorusPoint k) const { return R_total(k.k); }
  double beta(TorusPoint k) const { return beta_hat(k.k); }
  double hold_mean(TorusPoint k) const { return theta(k.k); }
};

ScatteringTables scattering_tables(const DispersionModel& model);

}  // namespace kinchain::model
