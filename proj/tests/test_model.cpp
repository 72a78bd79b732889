#include <cmath>

#include "doctest.h"
#include "kinchain/model.hpp"
#include "kinchain/quadrature.hpp"
#include "kinchain/rng.hpp"

using namespace kinchain;
using model::DispersionModel;

TEST_CASE("torus wraparound and distance") {
  CHECK(TorusPoint::wrap(0.7).k == doctest::Approx(-0.3));
  CHECK(TorusPoint::wrap(-0.5).k == doctest::Approx(-0.5));
  CHECK(TorusPoint::wrap(0.5).k == doctest::Approx(-0.5));
  StreamRng rng(3, 0);
  for (int i = 0; i < 1000; ++i) {
    double x = rng.uniform(-5, 5);
    CHECK(TorusPoint::wrap(x + 1.0).k == doctest::Approx(TorusPoint::wrap(x).k));
    CHECK(TorusPoint::wrap(x).k >= -0.5);
    CHECK(TorusPoint::wrap(x).k < 0.5);
  }
  CHECK(TorusPoint::distance({-0.45}, {0.45}) == doctest::Approx(0.1));
}

TEST_CASE("alpha_hat families") {
  auto u = DispersionModel::unpinned_nn();
  CHECK(u.alpha_hat({0.5}) == doctest::Approx(4.0));
  CHECK(u.alpha_hat({0.0}) == doctest::Approx(0.0));
  auto p = DispersionModel::pinned_nn(1.0);
  CHECK(p.alpha_hat({0.0}) == doctest::Approx(1.0));
}

TEST_CASE("omega and omega_prime, unpinned") {
  auto u = DispersionModel::unpinned_nn();
  CHECK(u.omega({0.25}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(u.omega_prime({0.5}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(u.omega_prime({-0.5}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(u.omega_prime({1e-9}) == doctest::Approx(2 * M_PI).epsilon(1e-9));
  CHECK(u.omega_prime({0.0}) == 0.0);
  CHECK(u.alpha_hat_second_deriv_at_zero() == doctest::Approx(8 * M_PI * M_PI));
  // odd
  StreamRng rng(5, 0);
  for (int i = 0; i < 100; ++i) {
    double k = rng.uniform(-0.5, 0.5);
    CHECK(u.omega_prime({k}) == doctest::Approx(-u.omega_prime({-k})).epsilon(1e-13));
  }
}

TEST_CASE("beta_hat values") {
  CHECK(model::beta_hat(0.5) == doctest::Approx(8.0));
  CHECK(model::beta_hat(0.0) == doctest::Approx(0.0));
  CHECK(model::beta_hat(0.25) == doctest::Approx(8.0));
}

TEST_CASE("r_elementary product and sum forms") {
  CHECK(model::r_elementary(0.0, 0.3) == doctest::Approx(0.0));
  CHECK(model::r_elementary(0.2, 0.2) == doctest::Approx(0.0));
  CHECK(model::r_elementary(0.25, -0.25) == doctest::Approx(2.0));
  StreamRng rng(11, 0);
  for (int i = 0; i < 1000; ++i) {
    double k = rng.uniform(-0.5, 0.5), kp = rng.uniform(-0.5, 0.5);
    double sum_form = std::sin(2 * M_PI * k) + std::sin(2 * M_PI * (k - kp)) +
                      std::sin(2 * M_PI * (kp - 2 * k));
    CHECK(model::r_elementary(k, kp) == doctest::Approx(sum_form).epsilon(1e-11));
  }
}

TEST_CASE("R_kernel values, symmetry, rank-2 factorization") {
  CHECK(model::R_kernel(0.25, 0.25) == doctest::Approx(2.0));
  CHECK(model::R_kernel(0.37, 0.0) == doctest::Approx(0.0));
  StreamRng rng(13, 0);
  for (int i = 0; i < 10000; ++i) {
    double k = rng.uniform(-0.5, 0.5), kp = rng.uniform(-0.5, 0.5);
    double R = model::R_kernel(k, kp);
    CHECK(R == doctest::Approx(model::R_kernel(kp, k)).epsilon(1e-12));
    CHECK(R == doctest::Approx(model::R_kernel(-k, kp)).epsilon(1e-12));
    double rank2 = 0.75 * (model::e_plus(k) * model::e_minus(kp) +
                           model::e_minus(k) * model::e_plus(kp));
    CHECK(std::fabs(R - rank2) < 1e-12 * std::max(1.0, R));
  }
}

TEST_CASE("R_eps_kernel reduces to R_kernel") {
  StreamRng rng(17, 0);
  for (int i = 0; i < 1000; ++i) {
    double p = rng.uniform(-3, 3), k = rng.uniform(-0.5, 0.5),
           kp = rng.uniform(-0.5, 0.5);
    CHECK(model::R_eps_kernel(p, k, kp, 0.0) ==
          doctest::Approx(model::R_kernel(k, kp)).epsilon(1e-13));
    CHECK(model::R_eps_kernel(0.0, k, kp, 0.7) ==
          doctest::Approx(model::R_kernel(k, kp)).epsilon(1e-13));
  }
}

TEST_CASE("R_eps_kernel eps-derivative at 0 matches central differences") {
  // rho_eps is invariant under eps -> -eps (the two r factors swap), so the
  // eps-derivative at 0 vanishes; the symmetric difference must see that,
  // and the one-sided quotient must shrink linearly in h.
  StreamRng rng(19, 0);
  for (int i = 0; i < 50; ++i) {
    double p = rng.uniform(-2, 2), k = rng.uniform(-0.5, 0.5),
           kp = rng.uniform(-0.5, 0.5);
    double h = 1e-5;
    double sym = (model::R_eps_kernel(p, k, kp, h) -
                  model::R_eps_kernel(p, k, kp, -h)) / (2 * h);
    CHECK(std::fabs(sym) < 1e-6);
    double d_h = (model::R_eps_kernel(p, k, kp, h) -
                  model::R_eps_kernel(p, k, kp, 0.0)) / h;
    double d_h2 = (model::R_eps_kernel(p, k, kp, h / 2) -
                   model::R_eps_kernel(p, k, kp, 0.0)) / (h / 2);
    CHECK(std::fabs(d_h2) < 0.6 * std::fabs(d_h) + 1e-9);
  }
}

TEST_CASE("scattering tables: closed forms and unit integrals") {
  auto t = model::scattering_tables(DispersionModel::unpinned_nn());
  CHECK(t.e1({0.5}) == doctest::Approx(8.0 / 3.0));
  CHECK(t.em1({0.25}) == doctest::Approx(2.0));
  CHECK(quad::integrate_torus(model::e_plus) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(quad::integrate_torus(model::e_minus) == doctest::Approx(1.0).epsilon(1e-10));
  // r = e1 + e-1, R = (3/4) r, beta = 4 R, theta = 1/R
  StreamRng rng(23, 0);
  for (int i = 0; i < 1000; ++i) {
    double k = rng.uniform(-0.5, 0.5);
    CHECK(model::r_total(k) ==
          doctest::Approx(model::e_plus(k) + model::e_minus(k)).epsilon(1e-13));
    CHECK(model::R_total(k) == doctest::Approx(0.75 * model::r_total(k)).epsilon(1e-12));
    CHECK(model::beta_hat(k) == doctest::Approx(4.0 * model::R_total(k)).epsilon(1e-12));
    if (k != 0.0)
      CHECK(model::theta(k) * model::R_total(k) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("marginalization identity 4 int R(k,.) = beta_hat(k)") {
  StreamRng rng(29, 0);
  for (int i = 0; i < 100; ++i) {
    double k = rng.uniform(-0.5, 0.5);
    double integral = quad::integrate_torus(
        [k](double kp) { return model::R_kernel(k, kp); });
    CHECK(4.0 * integral == doctest::Approx(model::beta_hat(k)).epsilon(1e-10));
    CHECK(integral == doctest::Approx(model::R_total(k)).epsilon(1e-10));
  }
}

TEST_CASE("custom table family reproduces unpinned-nn") {
  std::vector<double> ks, as;
  for (int i = 0; i <= 400; ++i) {
    double k = 0.5 * i / 400.0;
    double s = std::sin(M_PI * k);
    ks.push_back(k);
    as.push_back(4.0 * s * s);
  }
  auto c = DispersionModel::custom(ks, as);
  auto u = DispersionModel::unpinned_nn();
  CHECK(!c.pinned());
  for (double k : {0.05, 0.17, 0.33, 0.49}) {
    CHECK(c.alpha_hat({k}) == doctest::Approx(u.alpha_hat({k})).epsilon(1e-6));
    CHECK(c.omega_prime({k}) == doctest::Approx(u.omega_prime({k})).epsilon(1e-3));
    CHECK(c.omega_prime({-k}) == doctest::Approx(-c.omega_prime({k})).epsilon(1e-12));
  }
  CHECK(c.alpha_hat_second_deriv_at_zero() ==
        doctest::Approx(8 * M_PI * M_PI).epsilon(1e-3));
}

TEST_CASE("invalid models rejected") {
  CHECK_THROWS(DispersionModel::pinned_nn(-1.0));
  std::vector<double> ks{0.0, 0.2, 0.35, 0.5}, as{0.0, -1.0, 1.0, 4.0};
  CHECK_THROWS(DispersionModel::custom(ks, as));
}
