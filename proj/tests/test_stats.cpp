#include <cmath>

#include "doctest.h"
#include "kinchain/rng.hpp"
#include "kinchain/stats.hpp"

using namespace kinchain;

TEST_CASE("chi2 survival function against table values") {
  // classic table entries
  CHECK(stats::chi2_sf(92.010, 63) == doctest::Approx(0.01).epsilon(2e-3));
  CHECK(stats::chi2_sf(3.841, 1) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(stats::chi2_sf(20.090, 8) == doctest::Approx(0.01).epsilon(2e-3));
}

TEST_CASE("moments of a known sample") {
  std::vector<double> xs{1, 2, 3, 4, 5};
  auto m = stats::moments(xs);
  CHECK(m.mean == doctest::Approx(3.0));
  CHECK(m.var == doctest::Approx(2.5));
}

TEST_CASE("gaussian sample has vanishing excess kurtosis") {
  StreamRng rng(42, 0);
  std::vector<double> xs(200000);
  for (auto& x : xs) x = rng.normal();
  auto m = stats::moments(xs);
  CHECK(std::fabs(m.excess_kurtosis) < 3.0 * m.kurtosis_stderr);
  CHECK(std::fabs(m.mean) < 3.0 * m.mean_stderr);
}

TEST_CASE("line fit recovers slope") {
  std::vector<double> x{0, 1, 2, 3, 4, 5}, y;
  for (double xi : x) y.push_back(2.0 - 0.7 * xi);
  auto f = stats::fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("dense solve") {
  auto x = stats::solve_dense({{2, 1}, {1, 3}}, {5, 10});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(3.0));
}

TEST_CASE("stream rng streams are decorrelated and reproducible") {
  StreamRng a(7, 1), b(7, 2), a2(7, 1);
  double s = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double x = a.uniform();
    CHECK(x == a2.uniform());
    s += (x - 0.5) * (b.uniform() - 0.5);
  }
  CHECK(std::fabs(s / 1000.0) < 0.01);
}
