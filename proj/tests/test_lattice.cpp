#include <cmath>

#include "doctest.h"
#include "kinchain/kinetic.hpp"
#include "kinchain/lattice.hpp"

using namespace kinchain;
using lattice::cplx;
using model::DispersionModel;

namespace {
DispersionModel constant_omega_model(double w) {
  // constant alpha_hat = w^2: valid "pinned" table, omega identically w
  std::vector<double> ks, as;
  for (int i = 0; i <= 32; ++i) {
    ks.push_back(0.5 * i / 32.0);
    as.push_back(w * w);
  }
  return DispersionModel::custom(ks, as);
}
}  // namespace

TEST_CASE("init: zero amplitude, mass normalization, exact energy") {
  auto m = DispersionModel::unpinned_nn();
  StreamRng rng(1, 0);
  lattice::PacketSpec zero;
  zero.mass = 0.0;
  auto s0 = lattice::init_state(m, 256, 0.1, zero, rng);
  CHECK(s0.energy(m) == doctest::Approx(0.0));

  lattice::PacketSpec spec;  // defaults: k* = 0.2, mass 2
  spec.width_macro = 2.0;
  auto s = lattice::init_state(m, 1024, 0.1, spec, rng);
  // energy = mass / (2 eps^{1+gamma})
  CHECK(s.energy(m) == doctest::Approx(2.0 / (2.0 * 0.1)).epsilon(1e-10));
  double sum2 = 0.0;
  for (int x = 0; x < s.L; ++x) sum2 += s.p[x] * s.p[x] + 0.0 * s.q[x];
  CHECK(sum2 > 0.0);
  CHECK_THROWS(lattice::init_state(m, 100, 0.1, spec, rng));  // not a power of 2
  CHECK_THROWS(lattice::init_state(m, 256, 1.5, spec, rng));
}

TEST_CASE("harmonic step: constant-omega model rotates with exact period") {
  auto m = constant_omega_model(2.0);
  StreamRng rng(2, 0);
  lattice::PacketSpec spec;
  spec.width_macro = 1.0;
  auto s = lattice::init_state(m, 256, 0.2, spec, rng);
  auto p0 = s.p, q0 = s.q;
  const double period = 2.0 * M_PI / 2.0;
  for (int i = 0; i < 16; ++i) lattice::step_harmonic(s, m, period / 16.0);
  for (int x = 0; x < s.L; ++x) {
    CHECK(s.p[x] == doctest::Approx(p0[x]).epsilon(1e-12));
    CHECK(s.q[x] == doctest::Approx(q0[x]).epsilon(1e-12));
  }
}

TEST_CASE("harmonic step: single mode stays single mode, energy exact") {
  auto m = DispersionModel::unpinned_nn();
  lattice::LatticeState s;
  s.L = 128;
  s.eps = 0.1;
  s.p.assign(128, 0.0);
  s.q.assign(128, 0.0);
  for (int x = 0; x < 128; ++x) s.q[x] = std::cos(2 * M_PI * 7 * x / 128.0);
  double e0 = s.energy(m);
  for (int i = 0; i < 10000; ++i) lattice::step_harmonic(s, m, 0.05);
  CHECK(s.energy(m) == doctest::Approx(e0).epsilon(1e-12));
  // still only mode +-7: project on another mode
  double c3 = 0.0;
  for (int x = 0; x < 128; ++x) c3 += s.q[x] * std::cos(2 * M_PI * 3 * x / 128.0);
  CHECK(std::fabs(c3) < 1e-10);
}

TEST_CASE("noise step: exact invariants, eps=0 identity") {
  auto m = DispersionModel::unpinned_nn();
  StreamRng rng(3, 0);
  lattice::PacketSpec spec;
  auto s = lattice::init_state(m, 256, 0.5, spec, rng);
  double sum0 = s.momentum();
  double sumsq0 = 0.0;
  for (double v : s.p) sumsq0 += v * v;
  auto q_before = s.q;
  StreamRng nrng(4, 0);
  for (int i = 0; i < 100; ++i) lattice::step_noise(s, 0.05, nrng);
  double sumsq1 = 0.0;
  for (double v : s.p) sumsq1 += v * v;
  CHECK(s.momentum() == doctest::Approx(sum0).epsilon(1e-13));
  CHECK(sumsq1 == doctest::Approx(sumsq0).epsilon(1e-13));
  CHECK(s.q == q_before);  // noise acts on momenta only

  s.eps = 0.0;
  auto p_before = s.p;
  lattice::step_noise(s, 0.05, nrng);
  CHECK(s.p == p_before);
}

TEST_CASE("evolve conserves energy and momentum over many steps") {
  auto m = DispersionModel::unpinned_nn();
  StreamRng rng(5, 0), nrng(6, 0);
  lattice::PacketSpec spec;
  auto s = lattice::init_state(m, 1024, 0.1, spec, rng);
  double e0 = s.energy(m);
  double p0 = s.momentum();
  double pscale = 0.0;
  for (double v : s.p) pscale += v * v;
  pscale = std::sqrt(pscale);
  lattice::evolve(s, m, 200.0, 0.02, nrng);  // 10^4 steps
  CHECK(std::fabs(s.energy(m) / e0 - 1.0) < 1e-12);
  CHECK(std::fabs(s.momentum() - p0) / pscale < 1e-12);
}

TEST_CASE("ito drift of the noise matches the beta convolution") {
  auto m = DispersionModel::unpinned_nn();
  StreamRng rng(7, 0);
  lattice::PacketSpec spec;
  spec.width_macro = 0.5;
  auto s = lattice::init_state(m, 64, 0.5, spec, rng);
  auto chk = lattice::noise_drift_check(s, 5e-3, 400000, 11);
  CHECK(chk.pass);
  CHECK(chk.max_abs_defect < 0.1 * 0.5 * 6.0);  // far below the drift scale
}

TEST_CASE("wigner estimate: hermitian symmetry, p=0 row, mass in time") {
  auto m = DispersionModel::unpinned_nn();
  auto ens = lattice::init_ensemble(m, 512, 0.2, lattice::PacketSpec{}, 8, 21);
  std::vector<int> shifts{-4, -2, -1, 0, 1, 2, 4};
  auto w0 = lattice::wigner_estimate(ens, shifts);
  // p = 0 row real and nonnegative
  for (int j = 0; j < w0.L; ++j) {
    CHECK(w0.mean[3][j].imag() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(w0.mean[3][j].real() >= -1e-15);
  }
  // hermitian symmetry from the same realizations: W(-p,k) = W(p,k)^*
  for (int j = 0; j < w0.L; ++j) {
    CHECK(w0.mean[2][j].real() == doctest::Approx(w0.mean[4][j].real()).epsilon(1e-13));
    CHECK(w0.mean[2][j].imag() == doctest::Approx(-w0.mean[4][j].imag()).epsilon(1e-13));
  }
  // normalized mass: (1/L) sum_k W(0,k) = 1, constant in time
  auto mass_of = [&](const lattice::WignerEstimate& w) {
    double acc = 0.0;
    for (int j = 0; j < w.L; ++j) acc += w.mean[3][j].real();
    return acc / w.L;
  };
  CHECK(mass_of(w0) == doctest::Approx(1.0).epsilon(1e-12));
  lattice::evolve_ensemble(ens, 5.0, 0.05);
  auto w1 = lattice::wigner_estimate(ens, shifts);
  CHECK(mass_of(w1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("initial pairing matches the closed-form packet wigner") {
  auto m = DispersionModel::unpinned_nn();
  lattice::PacketSpec spec;
  spec.k_star = 0.2;
  spec.width_macro = 4.0;
  const int L = 2048;
  const double eps = 0.1;
  auto ens = lattice::init_ensemble(m, L, eps, spec, 4, 23);
  std::vector<int> shifts;
  for (int mm = -10; mm <= 10; ++mm) shifts.push_back(mm);
  auto w = lattice::wigner_estimate(ens, shifts);
  lattice::TestFunction J = [](double p, double k) {
    return cplx{std::exp(-p * p / 0.01) * std::exp(-40.0 * (k - 0.2) * (k - 0.2)),
                0.0};
  };
  cplx measured = lattice::pair_with_test_function(w, J);
  // closed form: W(0,p,k) = C exp(-(d(k,k*)^2 + (eps p/2)^2) / (2 sigma^2))
  //   * exp(-2 pi i x0 eps p), with C fixed by unit normalized mass
  double sigma = eps / (2.0 * M_PI * spec.width_macro);
  double norm = 0.0;
  for (int j = 0; j < L; ++j) {
    double k = (j < L / 2 ? j : j - L) / double(L);
    double d = TorusPoint::distance({k}, {spec.k_star});
    norm += std::exp(-d * d / (2 * sigma * sigma)) / L;
  }
  cplx analytic{0, 0};
  double x0 = spec.x_star_frac * L;
  for (int mi = 0; mi < (int)shifts.size(); ++mi) {
    double p = w.p[mi];
    for (int j = 0; j < L; ++j) {
      double k = w.k[j];
      double d = TorusPoint::distance({k}, {spec.k_star});
      double ek = std::exp(-(d * d + 0.25 * eps * eps * p * p) / (2 * sigma * sigma));
      cplx val = ek / norm * std::exp(cplx{0.0, -2.0 * M_PI * x0 * eps * p});
      analytic += val * std::conj(J(p, k)) / double(L);
    }
  }
  analytic *= 2.0 / (eps * L);
  CHECK(std::abs(measured - analytic) < 0.05 * std::abs(analytic) + 1e-6);
}

TEST_CASE("checkpoint round trip") {
  auto m = DispersionModel::unpinned_nn();
  StreamRng rng(9, 0);
  auto s = lattice::init_state(m, 128, 0.3, lattice::PacketSpec{}, rng);
  s.clock = 7.25;
  lattice::save_checkpoint(s, "/tmp/kinchain_ckpt_test", m, 9);
  auto t = lattice::load_checkpoint("/tmp/kinchain_ckpt_test");
  CHECK(t.L == s.L);
  CHECK(t.eps == s.eps);
  CHECK(t.clock == s.clock);
  CHECK(t.p == s.p);
  CHECK(t.q == s.q);
}

TEST_CASE("lattice relaxation selects the doubled-rate scattering generator") {
  // The kinetic equation of the Wigner limit carries twice the rate of the
  // jump-process generator used by the limit theorems. A k-sensitive test
  // function separates the two scales cleanly by t = 0.25.
  auto m = DispersionModel::unpinned_nn();
  const int L = 2048;
  const double eps = 0.1;
  auto ens = lattice::init_ensemble(m, L, eps, lattice::PacketSpec{}, 24, 177);
  std::vector<int> shifts;
  for (int mm = -20; mm <= 20; ++mm) shifts.push_back(mm);
  auto w0 = lattice::wigner_estimate(ens, shifts);
  lattice::TestFunction J = [](double p, double k) {
    return cplx{std::exp(-p * p / (0.08 * 0.08)) * std::cos(2 * M_PI * k), 0.0};
  };
  auto kin_pair = [&](kinetic::GeneratorScale sc, double t_macro) {
    quad::Grid grid;
    grid.k = w0.k;
    grid.w.assign(L, 1.0 / L);
    double dp = 2.0 / (eps * L);
    cplx out{0, 0};
    for (std::size_t si = 0; si < shifts.size(); ++si) {
      kinetic::KineticField f;
      f.grid = grid;
      f.p = w0.p[si];
      f.values = w0.mean[si];
      kinetic::EvolveOptions opt;
      opt.dt = 0.02;
      opt.scale = sc;
      auto ft = kinetic::evolve_kinetic(f, m, t_macro, opt).field;
      cplx acc{0, 0};
      for (int j = 0; j < L; ++j)
        acc += ft.values[j] * std::conj(J(w0.p[si], w0.k[j]));
      out += acc * dp / double(L);
    }
    return out;
  };
  const double t = 0.25;
  lattice::evolve_ensemble(ens, t / eps, 0.02);
  auto lat = lattice::ensemble_pairings(ens, shifts, {J});
  double se = std::max(lat[0].se.real(), 1e-4);
  double d1 = std::abs(lat[0].mean - kin_pair(kinetic::GeneratorScale::JumpProcess, t));
  double d2 = std::abs(lat[0].mean - kin_pair(kinetic::GeneratorScale::WignerLimit, t));
  CHECK(d2 < 4.0 * se);
  CHECK(d1 > 6.0 * se);
}
