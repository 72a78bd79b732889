#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kinchain/model.hpp"
#include "kinchain/rng.hpp"
#include "kinchain/torus.hpp"

namespace kinchain::chain {

inline constexpr std::uint64_t kDefaultStepCap = 1'000'000'000ULL;

/// Draw k with density e_{iota} on the torus by rejection from the uniform
/// proposal; envelope constants sup e_1 = 8/3, sup e_{-1} = 2.
TorusPoint sample_basis_density(int iota, StreamRng& rng);

/// k ~ pi(dk) = (1/2) r(k) dk, as the equal-weight mixture of the two
/// basis densities.
TorusPoint sample_stationary(StreamRng& rng);

/// One move of the skeleton chain. The kernel factorizes, so the step is
/// exact: with probability e_{-1}(k)/r(k) the next state is drawn from
/// density e_1, otherwise from e_{-1}.
TorusPoint skeleton_step(TorusPoint k, StreamRng& rng);

/// p(k, k') with P(k, dk') = p(k,k') pi(dk'); symmetric (reversibility).
double transition_density_wrt_pi(TorusPoint k, TorusPoint kp);

enum class StartMode { Stationary, Fixed };

struct JumpSegment {
  TorusPoint k;
  double hold;        // full exponential hold, untruncated
  double dt;          // time actually spent before total_time cuts in
};

/// Drive the continuous-time jump process for `total_time` units of
/// process time, calling visit(segment) once per visited state. Holding
/// times are theta(k) * Exp(1); the final interval is truncated.
/// `rate_scale` multiplies all jump rates (divides holds); 1 is the
/// skeleton-normalized process, 2 the Wigner-limit normalization.
template <class Visit>
std::uint64_t run_jump_process(std::optional<TorusPoint> fixed_start,
                               double total_time, StreamRng& rng, Visit&& visit,
                               std::uint64_t step_cap = kDefaultStepCap,
                               double rate_scale = 1.0) {
  if (total_time <= 0.0) throw std::invalid_argument("total_time must be > 0");
  TorusPoint k = fixed_start ? *fixed_start : sample_stationary(rng);
  double t = 0.0;
  std::uint64_t steps = 0;
  while (true) {
    if (++steps > step_cap) throw std::runtime_error("jump process: step cap hit");
    double hold = model::theta(k.k) * rng.exponential() / rate_scale;
    double dt = std::min(hold, total_time - t);
    visit(JumpSegment{k, hold, dt});
    t += hold;
    if (t >= total_time) break;
    k = skeleton_step(k, rng);
  }
  return steps;
}

struct JumpTrajectory {
  std::vector<TorusPoint> states;
  std::vector<double> holds;  // untruncated
  double total_time = 0.0;
  StartMode start = StartMode::Stationary;
};

JumpTrajectory jump_trajectory(std::optional<TorusPoint> fixed_start,
                               double total_time, StreamRng& rng,
                               std::uint64_t step_cap = kDefaultStepCap);

/// Largest modulus of a nonzero, non-unit eigenvalue of P on L^2(pi).
/// P has rank 2, so the nonzero spectrum is that of the 2x2 moment matrix
/// M[a][b] = int e_a e_{-b} / r dk; the unit eigenvalue (constants) is
/// excluded.
double spectral_gap();

/// The 2x2 reduction itself, row/column order (-1, +1).
struct GapMatrix {
  double m[2][2];
  double unit_eigen_defect;   // |M (1,1)^T - (1,1)^T|_inf
  double second_eigenvalue;   // the non-unit one (signed)
};
GapMatrix gap_matrix();

/// Oracle: same quantity from an n-point grid discretization of P.
double spectral_gap_grid_oracle(int n_points = 4096);

}  // namespace kinchain::chain
