#include "zoll/wavesim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "zoll/rng.hpp"

namespace zoll {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// one k-block in assembled form: mass diagonal, stiffness tridiagonal
// (both real), damping and observer diagonals
struct BlockGeom {
  int k = 0;
  int m = 0;                        // dof count
  std::vector<double> mass;         // coefficient of |v|^2, and of v-dot
  std::vector<double> sdiag, soff;  // stiffness S >= 0, E_pot = <u, S u>/2
  std::vector<double> a_dyn, a_obs;
};

BlockGeom block_geom(const IsothermalChart& chart, int k, const DampingSpec& dyn,
                     const DampingSpec& obs) {
  BlockGeom g;
  g.k = k;
  if (k != 0) {
    // interior x-grid nodes, Dirichlet truncation at +-X
    int m = chart.n - 2;
    g.m = m;
    g.mass.resize(m);
    g.sdiag.resize(m);
    g.soff.assign(std::size_t(m) - 1, -kTwoPi / chart.dx);
    g.a_dyn.resize(m);
    g.a_obs.resize(m);
    for (int i = 0; i < m; ++i) {
      double rho = chart.rho[i + 1];
      g.mass[i] = kTwoPi * rho * rho * chart.dx;
      g.sdiag[i] = kTwoPi * (2.0 / chart.dx + double(k) * k * chart.dx);
      g.a_dyn[i] = dyn.value_at_x(chart.x[i + 1], chart);
      g.a_obs[i] = obs.value_at_x(chart.x[i + 1], chart);
    }
  } else {
    // cell-centered ell grid; faces at the poles carry r = 0, which encodes
    // the natural Neumann condition
    int M = chart.n - 1;
    double d = std::numbers::pi / M;
    g.m = M;
    g.mass.resize(M);
    g.sdiag.assign(M, 0.0);
    g.soff.resize(std::size_t(M) - 1);
    g.a_dyn.resize(M);
    g.a_obs.resize(M);
    const SurfaceProfile& prof = *chart.profile;
    std::vector<double> rf(std::size_t(M) + 1, 0.0);
    for (int j = 1; j < M; ++j) rf[j] = prof.r_at_ell(j * d);
    for (int j = 0; j < M; ++j) {
      double rc = prof.r_at_ell((j + 0.5) * d);
      g.mass[j] = kTwoPi * rc * d;
      g.sdiag[j] = kTwoPi * (rf[j] + rf[j + 1]) / d;
      double x = chart.x_from_ell((j + 0.5) * d);
      g.a_dyn[j] = dyn.value_at_x(x, chart);
      g.a_obs[j] = obs.value_at_x(x, chart);
    }
    for (int j = 0; j + 1 < M; ++j) g.soff[j] = -kTwoPi * rf[j + 1] / d;
  }
  return g;
}

// Thomas solve with real tridiagonal coefficients and complex rhs
void tridiag_solve(const std::vector<double>& lower, const std::vector<double>& diag,
                   const std::vector<double>& upper,
                   std::vector<std::complex<double>>& rhs) {
  int m = int(diag.size());
  static thread_local std::vector<double> cp;
  cp.assign(m, 0.0);
  double piv = diag[0];
  rhs[0] /= piv;
  for (int i = 1; i < m; ++i) {
    cp[i] = upper[i - 1] / piv;
    piv = diag[i] - lower[i - 1] * cp[i];
    rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / piv;
  }
  for (int i = m - 2; i >= 0; --i) rhs[i] -= cp[i + 1] * rhs[i + 1];
}

struct BlockState {
  std::vector<std::complex<double>> u, v;
};

double block_energy(const BlockGeom& g, const BlockState& s) {
  double pot = 0.0, kin = 0.0;
  for (int i = 0; i < g.m; ++i) {
    pot += g.sdiag[i] * std::norm(s.u[i]);
    kin += g.mass[i] * std::norm(s.v[i]);
  }
  for (int i = 0; i + 1 < g.m; ++i)
    pot += 2.0 * g.soff[i] * (s.u[i].real() * s.u[i + 1].real() +
                              s.u[i].imag() * s.u[i + 1].imag());
  return 0.5 * (pot + kin);
}

double block_observer_rate(const BlockGeom& g, const BlockState& s) {
  double acc = 0.0;
  for (int i = 0; i < g.m; ++i) acc += g.a_obs[i] * g.mass[i] * std::norm(s.v[i]);
  return acc;
}

// dofs of a block from the stored state samples
BlockState block_state(const IsothermalChart& chart, const ModalBlock& b) {
  BlockState s;
  if (b.k != 0) {
    if (int(b.u.size()) != chart.n)
      throw std::invalid_argument("evolve: k != 0 block size mismatch");
    s.u.assign(b.u.begin() + 1, b.u.end() - 1);
    s.v.assign(b.v.begin() + 1, b.v.end() - 1);
  } else {
    if (int(b.u.size()) != chart.n - 1)
      throw std::invalid_argument("evolve: k = 0 block size mismatch");
    s.u = b.u;
    s.v = b.v;
  }
  return s;
}

EnergyTrace evolve_core(const IsothermalChart& chart, const ModalWaveState& state,
                        const DampingSpec& dyn, const DampingSpec& obs, double T,
                        double dt) {
  if (T <= 0.0 || dt <= 0.0) throw std::invalid_argument("evolve: T, dt > 0 required");
  if (state.lambda_max > 0.0 && dt > 0.2 / state.lambda_max)
    throw CFLViolation("evolve: dt = " + std::to_string(dt) + " > 0.2/lambda_max = " +
                       std::to_string(0.2 / state.lambda_max));

  int n_steps = int(std::llround(T / dt));
  if (n_steps < 1) n_steps = 1;
  dt = T / n_steps;

  std::vector<BlockGeom> geoms;
  std::vector<BlockState> states;
  for (const auto& b : state.blocks) {
    geoms.push_back(block_geom(chart, b.k, dyn, obs));
    states.push_back(block_state(chart, b));
  }

  EnergyTrace tr;
  tr.times.resize(std::size_t(n_steps) + 1);
  tr.energy.resize(std::size_t(n_steps) + 1);
  tr.dissipation.resize(std::size_t(n_steps) + 1);

  auto total_energy = [&]() {
    double e = 0.0;
    for (std::size_t b = 0; b < geoms.size(); ++b)
      e += block_energy(geoms[b], states[b]);
    return e;
  };
  auto total_rate = [&]() {
    double r = 0.0;
    for (std::size_t b = 0; b < geoms.size(); ++b)
      r += block_observer_rate(geoms[b], states[b]);
    return r;
  };

  tr.times[0] = 0.0;
  tr.energy[0] = total_energy();
  tr.dissipation[0] = 0.0;
  double rate_prev = total_rate(), acc = 0.0;

  // per-block factorized midpoint matrices: L = M + (dt/2) M a + (dt^2/4) S
  std::vector<std::vector<double>> ldiag(geoms.size()), llow(geoms.size());
  for (std::size_t b = 0; b < geoms.size(); ++b) {
    const auto& g = geoms[b];
    ldiag[b].resize(g.m);
    llow[b].resize(std::size_t(g.m) - 1);
    for (int i = 0; i < g.m; ++i)
      ldiag[b][i] =
          g.mass[i] * (1.0 + 0.5 * dt * g.a_dyn[i]) + 0.25 * dt * dt * g.sdiag[i];
    for (int i = 0; i + 1 < g.m; ++i) llow[b][i] = 0.25 * dt * dt * g.soff[i];
  }

  std::vector<std::complex<double>> rhs;
  for (int step = 1; step <= n_steps; ++step) {
    for (std::size_t b = 0; b < geoms.size(); ++b) {
      const auto& g = geoms[b];
      auto& s = states[b];
      rhs.assign(std::size_t(g.m), 0.0);
      for (int i = 0; i < g.m; ++i) {
        std::complex<double> su = g.sdiag[i] * s.u[i];
        if (i > 0) su += g.soff[i - 1] * s.u[i - 1];
        if (i + 1 < g.m) su += g.soff[i] * s.u[i + 1];
        rhs[i] = g.mass[i] * s.v[i] - 0.5 * dt * su;
      }
      tridiag_solve(llow[b], ldiag[b], llow[b], rhs);  // rhs becomes v_half
      for (int i = 0; i < g.m; ++i) {
        s.u[i] += dt * rhs[i];
        s.v[i] = 2.0 * rhs[i] - s.v[i];
      }
    }
    double rate = total_rate();
    acc += 0.5 * dt * (rate_prev + rate);
    rate_prev = rate;
    tr.times[step] = step * dt;
    tr.energy[step] = total_energy();
    tr.dissipation[step] = acc;
  }

  // decay estimate over the second half of the run, if the energy moved
  if (tr.energy[0] > 0.0) {
    try {
      DecayFit f = fit_decay(tr, 0.5 * T, T);
      tr.fitted_beta = f.beta;
      tr.fitted_C = f.C;
    } catch (const DegenerateFit&) {
      tr.fitted_beta = 0.0;
      tr.fitted_C = tr.energy[0];
    }
  }
  return tr;
}

// project mode samples onto the eigenvector of the semidiscrete wave operator
// nearest lambda2 by shifted inverse iteration. The shooting eigenfunction
// solves its own discretization, not this one; the O(dx^2) mismatch divided
// by rho^2 near the boundary would otherwise seed unresolved high-frequency
// content that pollutes the dissipation quadrature.
void purify_to_discrete(const BlockGeom& g, double lambda2, std::vector<double>& d) {
  double norm0 = 0.0;
  for (int i = 0; i < g.m; ++i) norm0 += g.mass[i] * d[i] * d[i];
  if (norm0 <= 0.0) return;
  double sigma = lambda2 * (1.0 + 1e-9) + 1e-12;
  std::vector<double> diag(g.m);
  for (int i = 0; i < g.m; ++i) diag[i] = g.sdiag[i] - sigma * g.mass[i];
  std::vector<std::complex<double>> rhs(g.m);
  for (int it = 0; it < 2; ++it) {
    for (int i = 0; i < g.m; ++i) rhs[i] = g.mass[i] * d[i];
    tridiag_solve(g.soff, diag, g.soff, rhs);
    double nrm = 0.0, align = 0.0;
    for (int i = 0; i < g.m; ++i) {
      nrm += g.mass[i] * rhs[i].real() * rhs[i].real();
      align += g.mass[i] * rhs[i].real() * d[i];
    }
    if (nrm <= 0.0) return;
    double s = std::sqrt(norm0 / nrm) * (align >= 0.0 ? 1.0 : -1.0);
    for (int i = 0; i < g.m; ++i) d[i] = s * rhs[i].real();
  }
}

void add_mode(const IsothermalChart& chart, ModalWaveState& st,
              const RadialEigenfunction& mode, std::complex<double> cu,
              std::complex<double> cv) {
  ModalBlock* blk = nullptr;
  for (auto& b : st.blocks)
    if (b.k == mode.k) blk = &b;
  if (!blk) {
    st.blocks.push_back({});
    blk = &st.blocks.back();
    blk->k = mode.k;
    int sz = (mode.k != 0) ? chart.n : chart.n - 1;
    blk->u.assign(sz, 0.0);
    blk->v.assign(sz, 0.0);
  }
  DampingSpec none;
  BlockGeom g = block_geom(chart, mode.k, none, none);
  std::vector<double> d(std::size_t(g.m));
  if (mode.k != 0) {
    for (int i = 0; i < g.m; ++i) d[i] = mode.w[i + 1];
  } else {
    // resample onto ell cell centers through the chart inverse
    double dl = std::numbers::pi / g.m;
    for (int j = 0; j < g.m; ++j) {
      double x = chart.x_from_ell((j + 0.5) * dl);
      double t = std::clamp((x + chart.X) / chart.dx, 0.0, double(chart.n - 1));
      int i = std::min(int(t), chart.n - 2);
      double fr = t - i;
      d[j] = (1.0 - fr) * mode.w[i] + fr * mode.w[i + 1];
    }
  }
  purify_to_discrete(g, mode.lambda2, d);
  int off = (mode.k != 0) ? 1 : 0;
  for (int i = 0; i < g.m; ++i) {
    blk->u[i + off] += cu * d[i];
    blk->v[i + off] += cv * d[i];
  }
  st.lambda_max = std::max(st.lambda_max, std::sqrt(std::max(mode.lambda2, 0.0)));
}

}  // namespace

ModalWaveState state_from_mode(const IsothermalChart& chart,
                               const RadialEigenfunction& mode, double amp,
                               double vel) {
  ModalWaveState st;
  add_mode(chart, st, mode, amp, vel);
  return st;
}

ModalWaveState random_band_limited(const IsothermalChart& chart,
                                   const Spectrum& spectrum, std::uint64_t seed) {
  Rng rng(seed);
  ModalWaveState st;
  for (const auto& cl : spectrum.clusters)
    for (const auto& m : cl.members) {
      double lam = std::sqrt(std::max(m.lambda2, 1e-12));
      std::complex<double> cu(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      std::complex<double> cv(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      add_mode(chart, st, m, cu, lam * cv);
    }
  return st;
}

EnergyTrace evolve(const IsothermalChart& chart, const ModalWaveState& state,
                   const DampingSpec& damping, double T, double dt) {
  return evolve_core(chart, state, damping, damping, T, dt);
}

EnergyTrace evolve_observed(const IsothermalChart& chart,
                            const ModalWaveState& state,
                            const DampingSpec& observer, double T, double dt) {
  DampingSpec none;
  return evolve_core(chart, state, none, observer, T, dt);
}

double energy_identity_residual(const EnergyTrace& trace) {
  if (trace.energy.empty() || trace.energy[0] <= 0.0)
    throw std::invalid_argument("energy_identity_residual: empty or zero trace");
  double worst = 0.0;
  for (std::size_t i = 0; i < trace.energy.size(); ++i)
    worst = std::max(worst, std::abs(trace.energy[i] - trace.energy[0] +
                                     trace.dissipation[i]));
  return worst / trace.energy[0];
}

DecayFit fit_decay(const EnergyTrace& trace, double t_lo, double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  double e_min = 1e300, e_max = 0.0;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    double t = trace.times[i];
    if (t < t_lo || t > t_hi) continue;
    double e = trace.energy[i];
    if (e <= 0.0)
      throw std::invalid_argument("fit_decay: energy not positive on the window");
    e_min = std::min(e_min, e);
    e_max = std::max(e_max, e);
    double y = std::log(e);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("fit_decay: fewer than two samples");
  if (e_max - e_min <= 1e-12 * e_max)
    throw DegenerateFit("fit_decay: relative energy variation below 1e-12");

  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  double icept = (sy - slope * sx) / m;
  DecayFit f;
  f.beta = -slope;
  f.C = std::exp(icept);
  double ss_res = 0.0, ss_tot = 0.0, ybar = sy / m;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    double t = trace.times[i];
    if (t < t_lo || t > t_hi) continue;
    double y = std::log(trace.energy[i]);
    ss_res += (y - (slope * t + icept)) * (y - (slope * t + icept));
    ss_tot += (y - ybar) * (y - ybar);
  }
  f.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

ObservabilityReport observability_experiment(const IsothermalChart& chart,
                                             const DampingSpec& damping,
                                             int ensemble, double T,
                                             const Spectrum& spectrum,
                                             std::uint64_t seed) {
  if (ensemble < 8)
    throw std::invalid_argument("observability_experiment: ensemble < 8");
  DampingSpec none;
  ObservabilityReport rep;
  rep.worst_ratio = 1e300;
  for (int s = 0; s < ensemble; ++s) {
    ModalWaveState st =
        random_band_limited(chart, spectrum, seed + std::uint64_t(s));
    double dt = 0.1 / std::max(st.lambda_max, 1.0);
    EnergyTrace tr = evolve_core(chart, st, none, damping, T, dt);
    double ratio =
        (tr.energy[0] > 0.0) ? tr.dissipation.back() / tr.energy[0] : 0.0;
    rep.per_sample.push_back(ratio);
    rep.worst_ratio = std::min(rep.worst_ratio, ratio);
  }
  return rep;
}

}  // namespace zoll
