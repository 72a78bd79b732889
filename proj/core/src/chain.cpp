#include "kinchain/chain.hpp"

#include <cmath>

#include "kinchain/quadrature.hpp"

namespace kinchain::chain {

namespace {
constexpr std::uint64_t kRejectionCap = 1'000'000;
}

TorusPoint sample_basis_density(int iota, StreamRng& rng) {
  const double sup = iota == 1 ? 8.0 / 3.0 : 2.0;
  for (std::uint64_t it = 0; it < kRejectionCap; ++it) {
    double k = rng.uniform(-0.5, 0.5);
    double u = sup * rng.uniform();
    double f = iota == 1 ? model::e_plus(k) : model::e_minus(k);
    if (u < f && k != 0.0) return TorusPoint{k};
  }
  throw std::runtime_error("rejection sampler: iteration cap hit (rng failure?)");
}

TorusPoint sample_stationary(StreamRng& rng) {
  int iota = rng.uniform() < 0.5 ? 1 : -1;
  return sample_basis_density(iota, rng);
}

TorusPoint skeleton_step(TorusPoint k, StreamRng& rng) {
  if (k.k == 0.0) throw std::invalid_argument("skeleton_step: k = 0");
  double w_to_plus = model::e_minus(k.k) / model::r_total(k.k);
  int iota = rng.uniform() < w_to_plus ? 1 : -1;
  return sample_basis_density(iota, rng);
}

double transition_density_wrt_pi(TorusPoint k, TorusPoint kp) {
  if (k.k == 0.0 || kp.k == 0.0)
    throw std::invalid_argument("transition density: k = 0");
  return 2.0 *
         (model::e_plus(k.k) * model::e_minus(kp.k) +
          model::e_minus(k.k) * model::e_plus(kp.k)) /
         (model::r_total(k.k) * model::r_total(kp.k));
}

JumpTrajectory jump_trajectory(std::optional<TorusPoint> fixed_start,
                               double total_time, StreamRng& rng,
                               std::uint64_t step_cap) {
  JumpTrajectory traj;
  traj.total_time = total_time;
  traj.start = fixed_start ? StartMode::Fixed : StartMode::Stationary;
  run_jump_process(
      fixed_start, total_time, rng,
      [&](const JumpSegment& s) {
        traj.states.push_back(s.k);
        traj.holds.push_back(s.hold);
      },
      step_cap);
  return traj;
}

GapMatrix gap_matrix() {
  auto moment = [](int a, int b) {
    return quad::integrate_torus([a, b](double k) {
      double fa = a == 1 ? model::e_plus(k) : model::e_minus(k);
      double fb = b == 1 ? model::e_plus(k) : model::e_minus(k);
      double r = model::r_total(k);
      return r > 0.0 ? fa * fb / r : 0.0;
    });
  };
  GapMatrix g{};
  // order (-1, +1): M[a][b] = int e_a e_{-b} / r
  g.m[0][0] = moment(-1, 1);
  g.m[0][1] = moment(-1, -1);
  g.m[1][0] = moment(1, 1);
  g.m[1][1] = moment(1, -1);
  double r0 = g.m[0][0] + g.m[0][1], r1 = g.m[1][0] + g.m[1][1];
  g.unit_eigen_defect = std::max(std::fabs(r0 - 1.0), std::fabs(r1 - 1.0));
  // trace = 1 + lambda_2 for a 2x2 with known unit eigenvalue
  g.second_eigenvalue = g.m[0][0] + g.m[1][1] - 1.0;
  return g;
}

double spectral_gap() { return std::fabs(gap_matrix().second_eigenvalue); }

double spectral_gap_grid_oracle(int n_points) {
  // Grid operator: S_ij = sqrt(pi_i) p(k_i,k_j) sqrt(pi_j), a symmetric
  // rank-2 matrix u v^T + v u^T with
  //   u_i = sqrt(2 pi_i) e_1(k_i)/r(k_i), v_i = sqrt(2 pi_i) e_{-1}(k_i)/r(k_i).
  // Its nonzero spectrum is that of the 2x2 Gram pencil.
  quad::Grid grid = quad::uniform_grid(n_points);
  double uu = 0, uv = 0, vv = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double k = grid.k[i];
    double r = model::r_total(k);
    if (r <= 0.0) continue;
    double pi_w = 0.5 * r * grid.w[i];
    double u = std::sqrt(2.0 * pi_w) * model::e_plus(k) / r;
    double v = std::sqrt(2.0 * pi_w) * model::e_minus(k) / r;
    uu += u * u;
    uv += u * v;
    vv += v * v;
  }
  // eigenvalues of [[uv, uu],[vv, uv]] (action in the (u,v) basis)
  double tr = 2.0 * uv, det = uv * uv - uu * vv;
  double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  double l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
  // discard the eigenvalue close to 1 (constants)
  return std::fabs(std::fabs(l1 - 1.0) < std::fabs(l2 - 1.0) ? l2 : l1);
}

}  // namespace kinchain::chain
