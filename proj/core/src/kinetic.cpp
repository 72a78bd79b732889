#include "kinchain/kinetic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kinchain/chain.hpp"
#include "kinchain/parallel.hpp"
#include "kinchain/stats.hpp"

namespace kinchain::kinetic {

cplx KineticField::inner_e(int iota) const {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double e = iota == 1 ? model::e_plus(grid.k[i]) : model::e_minus(grid.k[i]);
    s += grid.w[i] * e * values[i];
  }
  return s;
}

cplx KineticField::mass() const {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.w[i] * values[i];
  return s;
}

double KineticField::l1_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.w[i] * std::abs(values[i]);
  return s;
}

double KineticField::ba_norm(double a) const {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    s += grid.w[i] * std::abs(values[i]) / std::pow(std::fabs(grid.k[i]), 2.0 * a);
  return s;
}

KineticField make_field(quad::Grid grid, double p,
                        const std::function<cplx(double)>& f) {
  KineticField out;
  out.p = p;
  out.values.reserve(grid.size());
  for (double k : grid.k) out.values.push_back(f(k));
  out.grid = std::move(grid);
  return out;
}

EvolveResult evolve_kinetic(const KineticField& f0,
                            const model::DispersionModel& m, double T,
                            const EvolveOptions& opt) {
  if (opt.dt <= 0.0) throw std::invalid_argument("evolve_kinetic: dt > 0");
  EvolveResult out;
  out.field = f0;
  if (T <= f0.time) return out;
  const double c = scale_factor(opt.scale);
  const std::size_t n = f0.grid.size();

  double sup_op = 0.0;
  for (double k : f0.grid.k)
    sup_op = std::max(sup_op, std::fabs(m.omega_prime(TorusPoint{k})));
  out.cfl_warning = std::fabs(f0.p) * sup_op * opt.dt > 1.0;

  std::uint64_t n_steps =
      static_cast<std::uint64_t>(std::ceil((T - f0.time) / opt.dt - 1e-12));
  double dt = (T - f0.time) / static_cast<double>(n_steps);

  // Strang composition per step: exact transport phase e^{-i p omega' dt/2},
  // Crank-Nicolson scattering step, exact phase again. CN on the scattering
  // part preserves the mass functional (a linear invariant) to quadrature
  // exactness at any dt; the rank-2 gain makes the implicit solve a 2x2
  // system. Second order, A-stable.
  std::vector<cplx> phase(n);
  std::vector<double> e1(n), em1(n), lossR(n), dnm(n);
  for (std::size_t i = 0; i < n; ++i) {
    double k = f0.grid.k[i];
    phase[i] = std::exp(cplx{0.0, -f0.p * m.omega_prime(TorusPoint{k}) * 0.5 * dt});
    e1[i] = model::e_plus(k);
    em1[i] = model::e_minus(k);
    lossR[i] = c * model::R_total(k);
    dnm[i] = 1.0 + 0.5 * dt * lossR[i];
  }
  const double s34 = 0.75 * c;
  const double q = 0.5 * dt * s34;
  // moments of e_a e_b / (1 + dt R / 2) for the implicit 2x2 system
  double W11 = 0, W1m = 0, Wmm = 0;
  for (std::size_t i = 0; i < n; ++i) {
    W11 += f0.grid.w[i] * e1[i] * e1[i] / dnm[i];
    W1m += f0.grid.w[i] * e1[i] * em1[i] / dnm[i];
    Wmm += f0.grid.w[i] * em1[i] * em1[i] / dnm[i];
  }
  double A11 = 1.0 - q * W1m, A12 = -q * W11;
  double A21 = -q * Wmm, A22 = 1.0 - q * W1m;
  double det = A11 * A22 - A12 * A21;
  auto& u = out.field.values;
  std::vector<cplx> rhs(n);
  for (std::uint64_t step = 0; step < n_steps; ++step) {
    cplx m1{0, 0}, mm{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      u[i] *= phase[i];
      m1 += f0.grid.w[i] * e1[i] * u[i];
      mm += f0.grid.w[i] * em1[i] * u[i];
    }
    // rhs = (I + dt/2 L) u; then (I - dt/2 L) u' = rhs
    cplx b1{0, 0}, bm{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      cplx r = u[i] + 0.5 * dt * (-lossR[i] * u[i] +
                                  s34 * (m1 * em1[i] + mm * e1[i]));
      rhs[i] = r / dnm[i];
      b1 += f0.grid.w[i] * e1[i] * rhs[i];
      bm += f0.grid.w[i] * em1[i] * rhs[i];
    }
    cplx m1p = (A22 * b1 - A12 * bm) / det;
    cplx mmp = (-A21 * b1 + A11 * bm) / det;
    for (std::size_t i = 0; i < n; ++i)
      u[i] = (rhs[i] + q * (m1p * em1[i] + mmp * e1[i]) / dnm[i]) * phase[i];
  }
  out.field.time = T;
  return out;
}

McSolution mc_solution(const std::function<cplx(double)>& W0, double p,
                       double k0, double t, std::size_t n_paths,
                       const model::DispersionModel& m, std::uint64_t seed,
                       std::uint64_t stream0, unsigned threads,
                       GeneratorScale scale) {
  if (n_paths < 1000)
    throw std::invalid_argument("mc_solution: n_paths >= 1000 required");
  if (t < 0.0) throw std::invalid_argument("mc_solution: t >= 0");
  std::vector<cplx> vals(n_paths);
  const double c = scale_factor(scale);
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        StreamRng rng(seed, stream0 + i);
        if (t == 0.0) {
          vals[i] = W0(k0);
          return;
        }
        double phase = 0.0;
        double k_last = k0;
        chain::run_jump_process(
            TorusPoint{k0}, t, rng,
            [&](const chain::JumpSegment& s) {
              phase += m.omega_prime(s.k) * s.dt;
              k_last = s.k.k;
            },
            chain::kDefaultStepCap, c);
        vals[i] = std::exp(cplx{0.0, -p * phase}) * W0(k_last);
      },
      threads);
  cplx sum{0, 0}, sum2{0, 0};
  for (const cplx& v : vals) {
    sum += v;
    sum2 += cplx{v.real() * v.real(), v.imag() * v.imag()};
  }
  double nn = static_cast<double>(n_paths);
  cplx mean = sum / nn;
  double vr = std::max(0.0, sum2.real() / nn - mean.real() * mean.real());
  double vi = std::max(0.0, sum2.imag() / nn - mean.imag() * mean.imag());
  return {mean, {std::sqrt(vr / nn), std::sqrt(vi / nn)}};
}

SemigroupDecay semigroup_decay(const KineticField& f0,
                               const model::DispersionModel& m, double a,
                               const std::vector<double>& times, double dt) {
  if (f0.p != 0.0)
    throw std::invalid_argument("semigroup_decay: p = 0 field required");
  if (std::fabs(f0.mass()) > 1e-8)
    throw std::invalid_argument("semigroup_decay: mean-zero input required");
  SemigroupDecay out;
  out.times = times;
  out.ba_norm_initial = f0.ba_norm(a);
  if (!std::isfinite(out.ba_norm_initial))
    throw std::runtime_error("semigroup_decay: B_a norm not finite on grid");
  KineticField cur = f0;
  EvolveOptions opt;
  opt.dt = dt;
  for (double t : times) {
    cur = evolve_kinetic(cur, m, t, opt).field;
    out.l1.push_back(cur.l1_norm());
    out.compensated.push_back(cur.l1_norm() * std::pow(1.0 + t, a));
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 10.0 || out.l1[i] <= 0.0) continue;
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(out.l1[i]));
  }
  if (lx.size() >= 3) {
    auto fit = stats::fit_line(lx, ly);
    out.fitted_slope = fit.slope;
    out.slope_se = fit.slope_stderr;
  }
  return out;
}

namespace {
cplx resolvent_integral(const std::function<double(double)>& num, cplx lambda) {
  // int num(k) / (lambda + r(k)) dk on a graded mesh (complex lambda)
  const int per_side = 384;
  const quad::GaussRule g(10);
  cplx acc{0, 0};
  auto add = [&](double lo, double hi) {
    double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
      double k = mid + hw * g.x[i];
      for (double s : {-1.0, 1.0}) {
        double kk = s * k;
        acc += g.w[i] * hw * num(kk) / (lambda + model::r_total(kk));
      }
    }
  };
  double kmin = 1e-10;
  add(0.0, kmin);
  double ratio = std::pow(0.5 / kmin, 1.0 / per_side);
  double lo = kmin;
  for (int p = 0; p < per_side; ++p) {
    double hi = std::min(0.5, lo * ratio);
    add(lo, hi);
    lo = hi;
  }
  return acc;
}
}  // namespace

ResolventRecord resolvent_system(cplx lambda) {
  const double M = (4.0 / 3.0) * 2.25 + 1.0;  // (4/3) sup R + 1 = 4
  // lambda = 0 is the cut endpoint where all four integrals still converge
  if (lambda.imag() == 0.0 && lambda.real() < 0.0 && lambda.real() >= -M)
    throw std::invalid_argument("resolvent_system: lambda on the cut [-M, 0)");
  ResolventRecord rec;
  rec.lambda = lambda;
  rec.a = 1.0 - resolvent_integral(
                    [](double k) { return model::e_minus(k) * model::e_plus(k); },
                    lambda);
  rec.a_plus = -resolvent_integral(
      [](double k) { return model::e_plus(k) * model::e_plus(k); }, lambda);
  rec.a_minus = -resolvent_integral(
      [](double k) { return model::e_minus(k) * model::e_minus(k); }, lambda);
  rec.b_plus = -resolvent_integral([](double k) { return model::e_plus(k); }, lambda);
  rec.b_minus = -resolvent_integral([](double k) { return model::e_minus(k); }, lambda);
  rec.delta = rec.a * rec.a - rec.a_minus * rec.a_plus;
  rec.delta_identity =
      lambda * (lambda * rec.b_minus * rec.b_plus + rec.b_minus * rec.a_plus +
                rec.a_minus * rec.b_plus);
  rec.D = lambda == cplx{0.0, 0.0}
              ? rec.b_minus * rec.a_plus + rec.a_minus * rec.b_plus
              : rec.delta / lambda;
  return rec;
}

double resolvent_contour_margin(double rho, int n_samples) {
  const double M = 4.0;
  double margin = std::numeric_limits<double>::infinity();
  auto probe = [&](cplx lam) {
    if (std::abs(lam) < 1e-12) return;
    if (lam.imag() == 0.0 && lam.real() < 0.0) lam += cplx{0.0, 1e-9};
    auto rec = resolvent_system(lam);
    margin = std::min(margin, std::abs(rec.delta) / std::abs(lam));
  };
  for (int i = 0; i <= n_samples; ++i) {
    double s = static_cast<double>(i) / n_samples;
    probe(cplx{-M, -rho + 2.0 * rho * s});        // left side
    probe(cplx{1e-9, -rho + 2.0 * rho * s});      // right side (just off 0)
    probe(cplx{-M + M * s, rho});                 // top
    probe(cplx{-M + M * s, -rho});                // bottom
  }
  return margin;
}

cplx fractional_profile(cplx W0bar, double p, double t, bool pinned,
                        double c_hat) {
  double expo = pinned ? c_hat * p * p * t
                       : c_hat * std::pow(std::fabs(p), 1.5) * t;
  return W0bar * std::exp(-expo);
}

KineticChatFit kinetic_c_hat_fit(const model::DispersionModel& m, double N,
                                 double t, const std::vector<double>& p_list,
                                 int grid_cells, double dt) {
  KineticChatFit out;
  out.p = p_list;
  quad::Grid grid = quad::graded_grid(grid_cells, 1e-8, 8);
  double expo = m.pinned() ? 0.5 : 2.0 / 3.0;
  double b = m.pinned() ? 2.0 : 1.5;
  out.c_hat.resize(p_list.size());
  for (std::size_t j = 0; j < p_list.size(); ++j) {
    double p_eff = p_list[j] * std::pow(N, -expo);
    KineticField f = make_field(grid, p_eff, [](double) { return cplx{1.0, 0.0}; });
    EvolveOptions opt;
    opt.dt = dt;
    KineticField ft = evolve_kinetic(f, m, N * t, opt).field;
    double ratio = std::abs(ft.mass());  // initial mass is 1
    out.c_hat[j] = -std::log(ratio) / (std::pow(std::fabs(p_list[j]), b) * t);
  }
  return out;
}

}  // namespace kinchain::kinetic
