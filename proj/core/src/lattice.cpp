#include "kinchain/lattice.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>

#include "kinchain/parallel.hpp"

#include "json.hpp"

namespace kinchain::lattice {

namespace {

// FFTW plan cache. Plan creation is not thread safe; execution on distinct
// arrays via fftw_execute_dft is.
struct PlanPair {
  fftw_plan fwd, bwd;
};
std::mutex g_plan_mutex;
std::map<int, PlanPair> g_plans;

PlanPair plans_for(int L) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = g_plans.find(L);
  if (it != g_plans.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(L);
  PlanPair pp;
  pp.fwd = fftw_plan_dft_1d(L, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  pp.bwd = fftw_plan_dft_1d(L, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(buf);
  g_plans[L] = pp;
  return pp;
}

struct FftBuffer {
  int L = 0;
  fftw_complex* data = nullptr;
  explicit FftBuffer(int L_) : L(L_), data(fftw_alloc_complex(L_)) {}
  ~FftBuffer() { fftw_free(data); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  cplx* c() { return reinterpret_cast<cplx*>(data); }
};

double mode_k(int j, int L) {
  return (j < L / 2 ? j : j - L) / static_cast<double>(L);
}

void forward(const std::vector<double>& x, FftBuffer& out, PlanPair pp) {
  for (int j = 0; j < out.L; ++j) out.c()[j] = cplx{x[j], 0.0};
  fftw_execute_dft(pp.fwd, out.data, out.data);
}

void backward_real(FftBuffer& in, std::vector<double>& out, PlanPair pp) {
  fftw_execute_dft(pp.bwd, in.data, in.data);
  const double inv = 1.0 / in.L;
  for (int j = 0; j < in.L; ++j) out[j] = in.c()[j].real() * inv;
}

// color classes with pairwise disjoint triples on the cycle; L mod 3
// leftover sites at the seam become singleton classes
std::vector<std::vector<int>> color_classes(int L) {
  std::vector<std::vector<int>> classes(3);
  int body = L - (L % 3);
  for (int x = 0; x < body; ++x) classes[x % 3].push_back(x);
  for (int x = body; x < L; ++x) classes.push_back({x});
  return classes;
}

}  // namespace

double LatticeState::momentum() const {
  double s = 0.0;
  for (double v : p) s += v;
  return s;
}

double LatticeState::energy(const model::DispersionModel& m) const {
  PlanPair pp = plans_for(L);
  FftBuffer bq(L), bp(L);
  forward(q, bq, pp);
  forward(p, bp, pp);
  double h = 0.0;
  for (int j = 0; j < L; ++j) {
    double ah = m.alpha_hat(TorusPoint{mode_k(j, L)});
    h += std::norm(bp.c()[j]) + ah * std::norm(bq.c()[j]);
  }
  return 0.5 * h / L;
}

LatticeState init_state(const model::DispersionModel& m, int L, double eps,
                        const PacketSpec& spec, StreamRng& rng) {
  if (L < 8 || (L & (L - 1)) != 0)
    throw std::invalid_argument("init_state: L must be a power of 2, >= 8");
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("init_state: eps in (0, 1]");
  LatticeState s;
  s.L = L;
  s.eps = eps;
  s.p.assign(L, 0.0);
  s.q.assign(L, 0.0);
  if (spec.mass == 0.0) return s;  // zero-amplitude spec: H = 0

  const double sigma_k = eps / (2.0 * M_PI * spec.width_macro);
  const double x0 = spec.x_star_frac * L;
  const double theta = 2.0 * M_PI * rng.uniform();

  PlanPair pp = plans_for(L);
  FftBuffer psi(L), bq(L), bp(L);
  double mass_raw = 0.0;
  for (int j = 0; j < L; ++j) {
    double k = mode_k(j, L);
    double d = TorusPoint::distance(TorusPoint{k}, TorusPoint{spec.k_star});
    double A = std::exp(-d * d / (4.0 * sigma_k * sigma_k));
    psi.c()[j] = A * std::exp(cplx{0.0, -2.0 * M_PI * k * x0 + theta});
    mass_raw += A * A;
  }
  mass_raw /= L;  // sum_x |psi_x|^2 = (1/L) sum_j |psi_hat_j|^2
  double target = spec.mass / std::pow(eps, 1.0 + spec.gamma);
  double scale = std::sqrt(target / mass_raw);

  // psi_hat = omega q_hat + i p_hat with q, p real:
  //   q_hat(k) = [psi_hat(k) + psi_hat(-k)^*] / (2 omega),
  //   p_hat(k) = [psi_hat(k) - psi_hat(-k)^*] / (2 i).
  for (int j = 0; j < L; ++j) {
    int jm = (L - j) % L;
    double k = mode_k(j, L);
    cplx v = scale * psi.c()[j];
    cplx vm = scale * std::conj(psi.c()[jm]);
    double w = m.omega(TorusPoint{k});
    bq.c()[j] = w > 1e-12 ? (v + vm) / (2.0 * w) : cplx{0.0, 0.0};
    bp.c()[j] = (v - vm) / cplx{0.0, 2.0};
  }
  backward_real(bq, s.q, pp);
  backward_real(bp, s.p, pp);
  return s;
}

void step_harmonic(LatticeState& s, const model::DispersionModel& m, double h) {
  if (h <= 0.0) throw std::invalid_argument("step_harmonic: h > 0");
  PlanPair pp = plans_for(s.L);
  FftBuffer bq(s.L), bp(s.L);
  forward(s.q, bq, pp);
  forward(s.p, bp, pp);
  for (int j = 0; j < s.L; ++j) {
    double w = m.omega(TorusPoint{mode_k(j, s.L)});
    double c = std::cos(w * h), sn = std::sin(w * h);
    double sinc = w > 1e-9 ? sn / w : h * (1.0 - w * h * w * h / 6.0);
    cplx qj = bq.c()[j], pj = bp.c()[j];
    bq.c()[j] = c * qj + sinc * pj;
    bp.c()[j] = -w * sn * qj + c * pj;
  }
  backward_real(bq, s.q, pp);
  backward_real(bp, s.p, pp);
  s.clock += h;
}

namespace {
void apply_color(std::vector<double>& p, const std::vector<int>& sites, int L,
                 double eps, double half_h, StreamRng& rng) {
  const double ang_scale = -std::sqrt(3.0 * eps);
  const double sqrt_h = std::sqrt(half_h);
  for (int x : sites) {
    int xl = (x + L - 1) % L, xr = (x + 1) % L;
    double a = p[xl], b = p[x], c = p[xr];
    double phi = ang_scale * sqrt_h * rng.normal();
    double cf = std::cos(phi), sf = std::sin(phi) / std::sqrt(3.0);
    double sm = (a + b + c) / 3.0 * (1.0 - cf);
    p[xl] = cf * a + sf * (c - b) + sm;
    p[x] = cf * b + sf * (a - c) + sm;
    p[xr] = cf * c + sf * (b - a) + sm;
  }
}
}  // namespace

void step_noise(LatticeState& s, double h, StreamRng& rng) {
  if (h <= 0.0) throw std::invalid_argument("step_noise: h > 0");
  if (s.eps == 0.0) return;
  auto classes = color_classes(s.L);
  for (auto it = classes.begin(); it != classes.end(); ++it)
    apply_color(s.p, *it, s.L, s.eps, 0.5 * h, rng);
  for (auto it = classes.rbegin(); it != classes.rend(); ++it)
    apply_color(s.p, *it, s.L, s.eps, 0.5 * h, rng);
}

void evolve(LatticeState& s, const model::DispersionModel& m, double t_micro,
            double h, StreamRng& rng) {
  if (t_micro <= 0.0) return;
  std::uint64_t n = static_cast<std::uint64_t>(std::ceil(t_micro / h - 1e-12));
  double dt = t_micro / static_cast<double>(n);
  step_harmonic(s, m, 0.5 * dt);
  for (std::uint64_t i = 0; i + 1 < n; ++i) {
    step_noise(s, dt, rng);
    step_harmonic(s, m, dt);
  }
  step_noise(s, dt, rng);
  step_harmonic(s, m, 0.5 * dt);
}

LatticeEnsemble init_ensemble(const model::DispersionModel& m, int L, double eps,
                              const PacketSpec& spec, int n_realizations,
                              std::uint64_t seed, std::uint64_t stream0,
                              unsigned threads) {
  LatticeEnsemble ens;
  ens.m = &m;
  ens.L = L;
  ens.eps = eps;
  ens.gamma = spec.gamma;
  ens.seed = seed;
  ens.states.resize(n_realizations);
  plans_for(L);  // create plans up front, single threaded
  for (int r = 0; r < n_realizations; ++r)
    ens.noise_rngs.emplace_back(seed ^ 0x6a09e667f3bcc909ULL, stream0 + r);
  parallel_for(
      n_realizations,
      [&](std::size_t r) {
        StreamRng rng(seed, stream0 + r);
        ens.states[r] = init_state(m, L, eps, spec, rng);
      },
      threads);
  return ens;
}

void evolve_ensemble(LatticeEnsemble& ens, double t_micro, double h,
                     unsigned threads) {
  // wave-wrap guard: no ballistic front may cross half the box
  double v_max = 0.0;
  for (int j = 0; j < 64; ++j) {
    double k = (j + 0.5) / 128.0;
    v_max = std::max(v_max, std::fabs(ens.m->omega_prime(TorusPoint{k})));
  }
  if (v_max / (2.0 * M_PI) * t_micro >= ens.L / 2.0)
    throw std::invalid_argument("evolve_ensemble: wave would wrap the box");
  parallel_for(
      ens.states.size(),
      [&](std::size_t r) {
        double dt_total = t_micro - ens.states[r].clock;
        if (dt_total > 0.0)
          evolve(ens.states[r], *ens.m, dt_total, h, ens.noise_rngs[r]);
      },
      threads);
}

namespace {
void realization_wigner(const LatticeState& s, const model::DispersionModel& m,
                        const std::vector<int>& shifts, double eps, double gamma,
                        std::vector<std::vector<cplx>>& rows) {
  PlanPair pp = plans_for(s.L);
  FftBuffer bq(s.L), bp(s.L);
  forward(s.q, bq, pp);
  forward(s.p, bp, pp);
  std::vector<cplx> psi(s.L);
  for (int j = 0; j < s.L; ++j) {
    double w = m.omega(TorusPoint{mode_k(j, s.L)});
    psi[j] = w * bq.c()[j] + cplx{0.0, 1.0} * bp.c()[j];
  }
  const double scale = 0.5 * std::pow(eps, 1.0 + gamma);
  rows.assign(shifts.size(), std::vector<cplx>(s.L));
  for (std::size_t si = 0; si < shifts.size(); ++si) {
    int mshift = shifts[si];
    for (int j = 0; j < s.L; ++j) {
      int jm = ((j - mshift) % s.L + s.L) % s.L;
      int jp = ((j + mshift) % s.L + s.L) % s.L;
      rows[si][j] = scale * std::conj(psi[jm]) * psi[jp];
    }
  }
}
}  // namespace

WignerEstimate wigner_estimate(const LatticeEnsemble& ens,
                               const std::vector<int>& shifts,
                               unsigned threads) {
  WignerEstimate west;
  west.L = ens.L;
  west.eps = ens.eps;
  west.gamma = ens.gamma;
  west.t_macro = ens.states.empty() ? 0.0 : ens.states.front().clock * ens.eps;
  west.shifts = shifts;
  west.n_realizations = ens.states.size();
  for (int mshift : shifts) west.p.push_back(2.0 * mshift / (ens.eps * ens.L));
  for (int j = 0; j < ens.L; ++j) west.k.push_back(mode_k(j, ens.L));

  // accumulate over a fixed chunk partition (independent of thread count),
  // chunks combined in index order: deterministic and memory bounded
  const std::size_t M = ens.states.size();
  const std::size_t S = shifts.size();
  const std::size_t n_chunks = std::min<std::size_t>(8, M);
  const std::size_t cells = S * ens.L;
  std::vector<std::vector<double>> acc(n_chunks, std::vector<double>(4 * cells, 0.0));
  parallel_for(
      n_chunks,
      [&](std::size_t c) {
        std::size_t lo = c * M / n_chunks, hi = (c + 1) * M / n_chunks;
        std::vector<std::vector<cplx>> rows;
        for (std::size_t r = lo; r < hi; ++r) {
          realization_wigner(ens.states[r], *ens.m, shifts, ens.eps, ens.gamma,
                             rows);
          double* a = acc[c].data();
          for (std::size_t si = 0; si < S; ++si)
            for (int j = 0; j < ens.L; ++j) {
              cplx v = rows[si][j];
              std::size_t base = 4 * (si * ens.L + j);
              a[base] += v.real();
              a[base + 1] += v.imag();
              a[base + 2] += v.real() * v.real();
              a[base + 3] += v.imag() * v.imag();
            }
        }
      },
      threads);
  west.mean.assign(S, std::vector<cplx>(ens.L, {0, 0}));
  west.se.assign(S, std::vector<cplx>(ens.L, {0, 0}));
  for (std::size_t si = 0; si < S; ++si) {
    for (int j = 0; j < ens.L; ++j) {
      double sr = 0, si2 = 0, sr2 = 0, sim2 = 0;
      std::size_t base = 4 * (si * ens.L + j);
      for (std::size_t c = 0; c < n_chunks; ++c) {
        sr += acc[c][base];
        si2 += acc[c][base + 1];
        sr2 += acc[c][base + 2];
        sim2 += acc[c][base + 3];
      }
      double mr = sr / M, mi = si2 / M;
      west.mean[si][j] = {mr, mi};
      if (M > 1) {
        double vr = std::max(0.0, (sr2 - M * mr * mr) / (M - 1.0));
        double vi = std::max(0.0, (sim2 - M * mi * mi) / (M - 1.0));
        west.se[si][j] = {std::sqrt(vr / M), std::sqrt(vi / M)};
      }
    }
  }
  return west;
}

namespace {
double p_spacing(const WignerEstimate& w) {
  return 2.0 / (w.eps * w.L);
}
}  // namespace

cplx pair_with_test_function(const WignerEstimate& w, const TestFunction& J) {
  cplx acc{0, 0};
  for (std::size_t si = 0; si < w.shifts.size(); ++si)
    for (int j = 0; j < w.L; ++j)
      acc += w.mean[si][j] * std::conj(J(w.p[si], w.k[j]));
  return acc * p_spacing(w) / static_cast<double>(w.L);
}

double test_function_norm(const WignerEstimate& w, const TestFunction& J) {
  double acc = 0.0;
  for (std::size_t si = 0; si < w.shifts.size(); ++si)
    for (int j = 0; j < w.L; ++j) acc += std::abs(J(w.p[si], w.k[j]));
  return acc * p_spacing(w) / static_cast<double>(w.L);
}

std::vector<PairingStats> ensemble_pairings(const LatticeEnsemble& ens,
                                            const std::vector<int>& shifts,
                                            const std::vector<TestFunction>& Js,
                                            unsigned threads) {
  const std::size_t M = ens.states.size();
  std::vector<double> pm(shifts.size());
  for (std::size_t si = 0; si < shifts.size(); ++si)
    pm[si] = 2.0 * shifts[si] / (ens.eps * ens.L);
  const double dp = 2.0 / (ens.eps * ens.L);
  std::vector<std::vector<cplx>> vals(Js.size(), std::vector<cplx>(M));
  parallel_for(
      M,
      [&](std::size_t r) {
        std::vector<std::vector<cplx>> rows;
        realization_wigner(ens.states[r], *ens.m, shifts, ens.eps, ens.gamma,
                           rows);
        for (std::size_t ji = 0; ji < Js.size(); ++ji) {
          cplx acc{0, 0};
          for (std::size_t si = 0; si < shifts.size(); ++si)
            for (int j = 0; j < ens.L; ++j)
              acc += rows[si][j] *
                     std::conj(Js[ji](pm[si], mode_k(j, ens.L)));
          vals[ji][r] = acc * dp / static_cast<double>(ens.L);
        }
      },
      threads);
  std::vector<PairingStats> out(Js.size());
  for (std::size_t ji = 0; ji < Js.size(); ++ji) {
    double sr = 0, si2 = 0, sr2 = 0, sim2 = 0;
    for (const cplx& v : vals[ji]) {
      sr += v.real();
      si2 += v.imag();
      sr2 += v.real() * v.real();
      sim2 += v.imag() * v.imag();
    }
    double mr = sr / M, mi = si2 / M;
    double vr = M > 1 ? std::max(0.0, (sr2 - M * mr * mr) / (M - 1.0)) : 0.0;
    double vi = M > 1 ? std::max(0.0, (sim2 - M * mi * mi) / (M - 1.0)) : 0.0;
    out[ji].mean = {mr, mi};
    out[ji].se = {std::sqrt(vr / M), std::sqrt(vi / M)};
  }
  return out;
}

DriftCheck noise_drift_check(const LatticeState& frozen, double h,
                             std::size_t n_draws, std::uint64_t seed,
                             unsigned threads) {
  const int L = frozen.L;
  DriftCheck out;
  out.measured.assign(L, 0.0);
  out.se.assign(L, 0.0);
  out.expected.assign(L, 0.0);
  // beta = {6, -2, -2, -1, -1} at offsets {0, +-1, +-2}
  for (int x = 0; x < L; ++x) {
    auto at = [&](int y) { return frozen.p[((y % L) + L) % L]; };
    double conv = 6.0 * at(x) - 2.0 * (at(x - 1) + at(x + 1)) -
                  (at(x - 2) + at(x + 2));
    out.expected[x] = -0.5 * frozen.eps * conv;
  }
  const unsigned nthreads = threads == 0 ? default_threads() : threads;
  const std::size_t n_chunks = 16;
  std::vector<std::vector<double>> sum(n_chunks, std::vector<double>(L, 0.0));
  std::vector<std::vector<double>> sum2(n_chunks, std::vector<double>(L, 0.0));
  parallel_for(
      n_chunks,
      [&](std::size_t c) {
        std::size_t lo = c * n_draws / n_chunks,
                    hi = (c + 1) * n_draws / n_chunks;
        LatticeState work = frozen;
        for (std::size_t i = lo; i < hi; ++i) {
          work.p = frozen.p;
          StreamRng rng(seed, i);
          step_noise(work, h, rng);
          for (int x = 0; x < L; ++x) {
            double d = work.p[x] - frozen.p[x];
            sum[c][x] += d;
            sum2[c][x] += d * d;
          }
        }
      },
      nthreads);
  double tol_h = 0.0;
  for (int x = 0; x < L; ++x) {
    double s = 0, s2 = 0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
      s += sum[c][x];
      s2 += sum2[c][x];
    }
    double mean = s / n_draws;
    double var = std::max(0.0, s2 / n_draws - mean * mean);
    out.measured[x] = mean / h;
    out.se[x] = std::sqrt(var / n_draws) / h;
    tol_h = std::max(tol_h, std::fabs(frozen.p[x]));
  }
  // second-order Strang/Ito remainder: O(eps^2 |beta|_1^2 |p|_inf h)
  out.tolerance = frozen.eps * frozen.eps * 36.0 * tol_h * h;
  bool ok = true;
  for (int x = 0; x < L; ++x) {
    double defect = std::fabs(out.measured[x] - out.expected[x]);
    out.max_abs_defect = std::max(out.max_abs_defect, defect);
    if (defect > out.tolerance + 3.0 * out.se[x]) ok = false;
  }
  out.pass = ok;
  return out;
}

void save_checkpoint(const LatticeState& s, const std::string& path_prefix,
                     const model::DispersionModel& m, std::uint64_t seed) {
  {
    std::ofstream bin(path_prefix + ".state", std::ios::binary);
    bin.write(reinterpret_cast<const char*>(s.p.data()), s.L * sizeof(double));
    bin.write(reinterpret_cast<const char*>(s.q.data()), s.L * sizeof(double));
  }
  nlohmann::json side;
  side["L"] = s.L;
  side["eps"] = s.eps;
  side["clock"] = s.clock;
  side["seed"] = seed;
  side["family"] = m.family_name();
  side["conserved"] = {{"energy", s.energy(m)}, {"momentum", s.momentum()}};
  std::ofstream js(path_prefix + ".json");
  js << side.dump(2) << "\n";
}

LatticeState load_checkpoint(const std::string& path_prefix) {
  std::ifstream js(path_prefix + ".json");
  if (!js) throw std::runtime_error("load_checkpoint: missing sidecar");
  nlohmann::json side;
  js >> side;
  LatticeState s;
  s.L = side["L"].get<int>();
  s.eps = side["eps"].get<double>();
  s.clock = side["clock"].get<double>();
  s.p.resize(s.L);
  s.q.resize(s.L);
  std::ifstream bin(path_prefix + ".state", std::ios::binary);
  if (!bin) throw std::runtime_error("load_checkpoint: missing state file");
  bin.read(reinterpret_cast<char*>(s.p.data()), s.L * sizeof(double));
  bin.read(reinterpret_cast<char*>(s.q.data()), s.L * sizeof(double));
  return s;
}

}  // namespace kinchain::lattice
