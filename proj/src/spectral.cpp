#include "zoll/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "zoll/par.hpp"

namespace zoll {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// root finding: Illinois variant of false position with bisection fallback
template <class F>
double find_root(F&& f, double lo, double hi, double flo, double fhi) {
  double side = 0;
  for (int it = 0; it < 200; ++it) {
    double mid = (flo != fhi) ? (lo * fhi - hi * flo) / (fhi - flo)
                              : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    if (hi - lo < 1e-14 * (1.0 + std::abs(mid))) return mid;
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      fhi = fm;
      if (side == +1) flo *= 0.5;
      side = +1;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Numerov machinery for k != 0 on a uniform x-grid

struct Level {
  int n = 0;
  double d = 0.0;
  std::vector<double> rho2;  // rho^2 at the level's nodes
};

Level chart_level(const IsothermalChart& ch) {
  Level lv;
  lv.n = ch.n;
  lv.d = ch.dx;
  lv.rho2.resize(ch.n);
  for (int i = 0; i < ch.n; ++i) lv.rho2[i] = ch.rho[i] * ch.rho[i];
  return lv;
}

// refined level: midpoint values of f by two-point Hermite (f' = rho is known
// at the nodes), then rho = r(f)
Level refined_level(const IsothermalChart& ch) {
  Level lv;
  lv.n = 2 * ch.n - 1;
  lv.d = 0.5 * ch.dx;
  lv.rho2.resize(lv.n);
  for (int i = 0; i < ch.n; ++i) lv.rho2[2 * i] = ch.rho[i] * ch.rho[i];
  for (int i = 0; i + 1 < ch.n; ++i) {
    double r = ch.profile->r_at_ell(ch.f_mid(i));
    lv.rho2[2 * i + 1] = r * r;
  }
  return lv;
}

struct Sweeps {
  std::vector<double> wl, wr;  // valid on [0, m+1] and [m, n-1]
  int m = 0;
};

// matching determinant of the Numerov recurrence with WKB Robin seeding at
// both truncation boundaries; optionally records the sweeps
double numerov_det(const Level& lv, int k, double lambda2, Sweeps* out = nullptr) {
  const int n = lv.n;
  const double d = lv.d, d2 = d * d;
  const int m = (n - 1) / 2;
  auto Q = [&](int j) { return double(k) * k - lambda2 * lv.rho2[j]; };
  auto c_of = [&](int j) { return 1.0 - d2 * Q(j) / 12.0; };
  auto kappa = [&](int j) { return std::sqrt(std::max(Q(j), 0.0)); };

  std::vector<double> wl(std::size_t(m) + 2), wr(n);

  // left sweep, growing into the domain
  wl[0] = 1.0;
  wl[1] = std::exp(std::min(0.5 * d * (kappa(0) + kappa(1)), 300.0));
  {
    double cm = c_of(0), c0 = c_of(1);
    for (int j = 1; j <= m; ++j) {
      double cp = c_of(j + 1);
      wl[j + 1] = ((12.0 - 10.0 * c0) * wl[j] - cm * wl[j - 1]) / cp;
      cm = c0;
      c0 = cp;
      if (std::abs(wl[j + 1]) > 1e120) {
        for (int t = 0; t <= j + 1; ++t) wl[t] *= 1e-120;
      }
    }
  }

  // right sweep
  wr[n - 1] = 1.0;
  wr[n - 2] = std::exp(std::min(0.5 * d * (kappa(n - 1) + kappa(n - 2)), 300.0));
  {
    double cm = c_of(n - 1), c0 = c_of(n - 2);
    for (int j = n - 2; j > m; --j) {
      double cp = c_of(j - 1);
      wr[j - 1] = ((12.0 - 10.0 * c0) * wr[j] - cm * wr[j + 1]) / cp;
      cm = c0;
      c0 = cp;
      if (std::abs(wr[j - 1]) > 1e120) {
        for (int t = n - 1; t >= j - 1; --t) wr[t] *= 1e-120;
      }
    }
  }

  double det = wl[m] * wr[m + 1] - wl[m + 1] * wr[m];
  double scale = (std::abs(wl[m]) + std::abs(wl[m + 1])) *
                     (std::abs(wr[m]) + std::abs(wr[m + 1])) +
                 1e-300;
  if (out) {
    out->wl = std::move(wl);
    out->wr = std::move(wr);
    out->m = m;
  }
  return det / scale;
}

// polish one eigenvalue estimate on one level; returns NaN if no bracket
double polish_on_level(const Level& lv, int k, double est, double delta,
                       double lo_limit) {
  auto f = [&](double l2) { return numerov_det(lv, k, l2); };
  double lo = std::max(est - delta, lo_limit);
  double hi = est + delta;
  double flo = f(lo), fhi = f(hi);
  for (int ex = 0; ex < 10 && (flo > 0) == (fhi > 0); ++ex) {
    delta *= 1.6;
    lo = std::max(est - delta, lo_limit);
    hi = est + delta;
    flo = f(lo);
    fhi = f(hi);
  }
  if ((flo > 0) == (fhi > 0)) return std::nan("");
  return find_root(f, lo, hi, flo, fhi);
}

// assemble the normalized eigenfunction on the chart grid from a fine-level
// converged eigenvalue
RadialEigenfunction build_eigenfunction(const IsothermalChart& ch, const Level& fine,
                                        int k, double lambda2_fine,
                                        double lambda2_report) {
  Sweeps sw;
  numerov_det(fine, k, lambda2_fine, &sw);
  const int n = fine.n, m = sw.m;

  double num = sw.wl[m] * sw.wr[m] + sw.wl[m + 1] * sw.wr[m + 1];
  double den = sw.wr[m] * sw.wr[m] + sw.wr[m + 1] * sw.wr[m + 1];
  double s = num / den;

  std::vector<double> w(n);
  for (int j = 0; j <= m; ++j) w[j] = sw.wl[j];
  for (int j = m + 1; j < n; ++j) w[j] = s * sw.wr[j];

  // discrete-equation defect of the glued solution
  const double d2 = fine.d * fine.d;
  auto c_of = [&](int j) {
    return 1.0 - d2 * (double(k) * k - lambda2_fine * fine.rho2[j]) / 12.0;
  };
  double res = 0.0;
  for (int j = 1; j + 1 < n; ++j) {
    double t1 = c_of(j + 1) * w[j + 1];
    double t2 = (12.0 - 10.0 * c_of(j)) * w[j];
    double t3 = c_of(j - 1) * w[j - 1];
    double r = std::abs(t1 - t2 + t3);
    double sc = std::abs(t1) + std::abs(t2) + std::abs(t3) + 1e-300;
    res = std::max(res, r / sc);
  }

  // downsample to the chart grid and normalize in rho^2 dx
  RadialEigenfunction ef;
  ef.k = k;
  ef.lambda2 = lambda2_report;
  ef.residual = res;
  ef.w.resize(ch.n);
  for (int i = 0; i < ch.n; ++i) ef.w[i] = w[2 * i];
  double nrm = 0.0;
  for (int i = 0; i < ch.n; ++i) {
    double wt = (i == 0 || i == ch.n - 1) ? 0.5 : 1.0;
    nrm += wt * ef.w[i] * ef.w[i] * ch.rho[i] * ch.rho[i];
  }
  nrm = std::sqrt(nrm * ch.dx);
  int jmax = 0;
  for (int i = 1; i < ch.n; ++i)
    if (std::abs(ef.w[i]) > std::abs(ef.w[jmax])) jmax = i;
  double sgn = (ef.w[jmax] >= 0.0) ? 1.0 : -1.0;
  for (auto& v : ef.w) v *= sgn / nrm;
  ef.norm_rho = 1.0;
  return ef;
}

// ---------------------------------------------------------------------------
// matrix stage: strided symmetric tridiagonal FD with Dirichlet truncation,
// eigenvalues only; accurate enough to bracket every window eigenvalue
std::vector<double> matrix_stage(const IsothermalChart& ch, int k, double lo,
                                 double hi) {
  int stride = std::max(1, (ch.n - 1) / 4096);
  int nn = (ch.n - 1) / stride + 1;  // strided node count
  int ni = nn - 2;                   // interior
  double d = ch.dx * stride;
  Eigen::VectorXd dv(ni), ev(ni - 1);
  for (int i = 0; i < ni; ++i) {
    double rho = ch.rho[(i + 1) * stride];
    dv[i] = (2.0 / (d * d) + double(k) * k) / (rho * rho);
  }
  for (int i = 0; i + 1 < ni; ++i) {
    double ra = ch.rho[(i + 1) * stride], rb = ch.rho[(i + 2) * stride];
    ev[i] = -1.0 / (d * d * ra * rb);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(dv, ev, Eigen::EigenvaluesOnly);

  auto pad = [&](double l2) {
    return 0.5 + l2 * (l2 * d * d) / 4.0;  // FD error bound with margin
  };
  std::vector<double> ests;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double l2 = es.eigenvalues()[i];
    if (l2 > lo - pad(std::abs(l2)) && l2 < hi + pad(std::abs(l2)))
      ests.push_back(l2);
    if (l2 > hi + pad(std::abs(l2))) break;
  }
  return ests;
}

// ---------------------------------------------------------------------------
// k = 0: regular singular Sturm-Liouville problem on ell in [0, pi]

struct EllGrid {
  int M = 0;        // number of intervals at this level
  double d = 0.0;   // node spacing
  int half_stride;  // stride into the shared half-spacing arrays
};

struct EllData {
  // r and r'/r tabulated at spacing d_fine/2 over [0, pi]
  std::vector<double> r, rp_over_r;
  double dh = 0.0;  // half spacing
};

EllData build_ell_data(const SurfaceProfile& prof, int Mf) {
  EllData ed;
  int n = 2 * Mf + 1;
  ed.dh = kPi / (2.0 * Mf);
  ed.r.resize(n);
  ed.rp_over_r.resize(n);
  for (int j = 0; j < n; ++j) {
    double ell = j * ed.dh;
    double th = prof.theta_from_ell(ell);
    double r = std::sin(th);
    double rp = std::cos(th) / (1.0 + prof.h(std::cos(th)));
    ed.r[j] = r;
    ed.rp_over_r[j] = (r > 1e-300) ? rp / r : 0.0;
  }
  return ed;
}

struct EllState {
  double w, u;  // u = dw/dell
};

// series solution near a pole: w'' + (1/ell) w' + lambda^2 w ~ 0, regular
// branch w = 1 - (lambda ell)^2/4 + (lambda ell)^4/64
EllState pole_series(double lambda2, double dist) {
  double z2 = lambda2 * dist * dist;
  EllState s;
  s.w = 1.0 - z2 / 4.0 + z2 * z2 / 64.0;
  s.u = -lambda2 * dist / 2.0 + lambda2 * lambda2 * dist * dist * dist / 16.0;
  return s;
}

// RK4 step of w'' = -(r'/r) w' - lambda^2 w using tabulated half-spacing data;
// j indexes the node at the start, hstep = +/- d (full node step)
EllState rk4_ell_tab(const EllData& ed, EllState y, int jh, int dir, int half_stride,
                     double hstep, double lambda2) {
  auto F = [&](int idx, const EllState& s) {
    return EllState{s.u, -ed.rp_over_r[idx] * s.u - lambda2 * s.w};
  };
  int jm = jh + dir * half_stride;       // midpoint index (half-spacing units)
  int je = jh + dir * 2 * half_stride;   // end node
  EllState k1 = F(jh, y);
  EllState k2 = F(jm, {y.w + 0.5 * hstep * k1.w, y.u + 0.5 * hstep * k1.u});
  EllState k3 = F(jm, {y.w + 0.5 * hstep * k2.w, y.u + 0.5 * hstep * k2.u});
  EllState k4 = F(je, {y.w + hstep * k3.w, y.u + hstep * k3.u});
  return {y.w + hstep / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w),
          y.u + hstep / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u)};
}

// one RK4 step with direct profile evaluation (for the partial step to ell0)
EllState rk4_ell_direct(const SurfaceProfile& prof, EllState y, double ell0_from,
                        double hstep, double lambda2) {
  auto F = [&](double ell, const EllState& s) {
    double th = prof.theta_from_ell(ell);
    double r = std::sin(th);
    double rp = std::cos(th) / (1.0 + prof.h(std::cos(th)));
    return EllState{s.u, -(rp / r) * s.u - lambda2 * s.w};
  };
  EllState k1 = F(ell0_from, y);
  EllState k2 = F(ell0_from + 0.5 * hstep,
                  {y.w + 0.5 * hstep * k1.w, y.u + 0.5 * hstep * k1.u});
  EllState k3 = F(ell0_from + 0.5 * hstep,
                  {y.w + 0.5 * hstep * k2.w, y.u + 0.5 * hstep * k2.u});
  EllState k4 = F(ell0_from + hstep, {y.w + hstep * k3.w, y.u + hstep * k3.u});
  return {y.w + hstep / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w),
          y.u + hstep / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u)};
}

struct EllSweeps {
  std::vector<EllState> left, right;  // node-indexed, valid [0, jm] / [jm+1, M]
  int jm = 0;
  double scale_right = 1.0;
};

// matching determinant at ell0 for the k = 0 problem
double ell_det(const SurfaceProfile& prof, const EllData& ed, int M, int half_stride,
               double lambda2, double ell0, EllSweeps* out = nullptr) {
  double d = kPi / M;
  int jm = int(ell0 / d);  // match from node jm via a partial step

  std::vector<EllState> left, right;
  if (out) {
    left.resize(std::size_t(jm) + 1);
    right.resize(std::size_t(M) + 1);
  }

  // left: series start at node 2
  EllState yl = pole_series(lambda2, 2.0 * d);
  if (out) {
    left[0] = pole_series(lambda2, 0.0);
    left[1] = pole_series(lambda2, d);
    left[2] = yl;
  }
  for (int j = 2; j < jm; ++j) {
    yl = rk4_ell_tab(ed, yl, 2 * half_stride * j, +1, half_stride, d, lambda2);
    if (out) left[j + 1] = yl;
  }
  EllState yl0 = rk4_ell_direct(prof, yl, jm * d, ell0 - jm * d, lambda2);

  // right: series start at node M-2 (distance 2d from the pole at pi)
  EllState yr = pole_series(lambda2, 2.0 * d);
  yr.u = -yr.u;  // dw/dell = -dw/ddist
  if (out) {
    right[M] = pole_series(lambda2, 0.0);
    right[M - 1] = pole_series(lambda2, d);
    right[M - 1].u = -right[M - 1].u;
    right[M - 2] = yr;
  }
  for (int j = M - 2; j > jm + 1; --j) {
    yr = rk4_ell_tab(ed, yr, 2 * half_stride * j, -1, half_stride, -d, lambda2);
    if (out) right[j - 1] = yr;
  }
  EllState yr0 = rk4_ell_direct(prof, yr, (jm + 1) * d, ell0 - (jm + 1) * d, lambda2);

  double s = std::sqrt(std::abs(lambda2)) + 1.0;
  double det = yl0.w * yr0.u - yl0.u * yr0.w;
  double scale = (std::abs(yl0.w) + std::abs(yl0.u) / s) *
                     (std::abs(yr0.w) + std::abs(yr0.u) / s) * s +
                 1e-300;
  if (out) {
    out->left = std::move(left);
    out->right = std::move(right);
    out->jm = jm;
    // continuity scale for gluing, least squares over (w, u/s)
    double num = yl0.w * yr0.w + yl0.u * yr0.u / (s * s);
    double den = yr0.w * yr0.w + yr0.u * yr0.u / (s * s);
    out->scale_right = num / den;
  }
  return det / scale;
}

std::vector<double> matrix_stage_k0(const SurfaceProfile& prof, double lo, double hi) {
  const int M = 2048;
  double d = kPi / M;
  Eigen::VectorXd dv(M), ev(M - 1);
  std::vector<double> rf(M + 1), rc(M);
  for (int j = 0; j <= M; ++j) rf[j] = prof.r_at_ell(j * d);
  for (int j = 0; j < M; ++j) rc[j] = prof.r_at_ell((j + 0.5) * d);
  for (int j = 0; j < M; ++j) dv[j] = (rf[j] + rf[j + 1]) / (d * d * rc[j]);
  for (int j = 0; j + 1 < M; ++j)
    ev[j] = -rf[j + 1] / (d * d * std::sqrt(rc[j] * rc[j + 1]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(dv, ev, Eigen::EigenvaluesOnly);

  auto pad = [&](double l2) { return 0.3 + l2 * (l2 * d * d) / 4.0; };
  std::vector<double> ests;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    double l2 = es.eigenvalues()[i];
    if (l2 > lo - pad(std::abs(l2)) && l2 < hi + pad(std::abs(l2)))
      ests.push_back(l2);
    if (l2 > hi + pad(std::abs(l2))) break;
  }
  return ests;
}

std::vector<RadialEigenfunction> radial_solve_k0(const IsothermalChart& ch, double lo,
                                                 double hi) {
  const SurfaceProfile& prof = *ch.profile;
  const int Mf = 2 * (ch.n - 1);
  const int M0 = Mf / 2;
  EllData ed = build_ell_data(prof, Mf);
  double ell0 = prof.ell0();

  auto det_f = [&](double l2) { return ell_det(prof, ed, Mf, 1, l2, ell0); };
  auto det_c = [&](double l2) { return ell_det(prof, ed, M0, 2, l2, ell0); };

  auto polish = [&](auto&& f, double est, double delta) -> double {
    double a = est - delta, b = est + delta;
    double fa = f(a), fb = f(b);
    for (int ex = 0; ex < 10 && (fa > 0) == (fb > 0); ++ex) {
      delta *= 1.6;
      a = est - delta;
      b = est + delta;
      fa = f(a);
      fb = f(b);
    }
    if ((fa > 0) == (fb > 0)) return std::nan("");
    return find_root(f, a, b, fa, fb);
  };

  std::vector<RadialEigenfunction> out;
  double d_m = kPi / 2048;
  for (double est : matrix_stage_k0(prof, lo, hi)) {
    double delta = 0.3 + std::abs(est) * (std::abs(est) * d_m * d_m) / 4.0;
    double lc = polish(det_c, est, delta);
    double lf = polish(det_f, est, delta);
    if (std::isnan(lc) || std::isnan(lf))
      throw NoConvergence("radial_solve k=0: polishing failed near lambda2 = " +
                          std::to_string(est));
    double l2 = (16.0 * lf - lc) / 15.0;
    if (l2 <= lo || l2 >= hi) continue;

    EllSweeps sw;
    ell_det(prof, ed, Mf, 1, lf, ell0, &sw);
    double dell = kPi / Mf;

    // glued solution on the ell nodes
    std::vector<EllState> wg(std::size_t(Mf) + 1);
    for (int j = 0; j <= sw.jm; ++j) wg[j] = sw.left[j];
    for (int j = sw.jm + 1; j <= Mf; ++j)
      wg[j] = {sw.scale_right * sw.right[j].w, sw.scale_right * sw.right[j].u};

    RadialEigenfunction ef;
    ef.k = 0;
    ef.lambda2 = l2;

    // ODE defect by 5-point differencing away from the poles and the seam
    double res = 0.0;
    for (int j = 4; j + 4 <= Mf; ++j) {
      if (std::abs(j - sw.jm) <= 2) continue;
      double wpp = (-wg[j - 2].w + 16 * wg[j - 1].w - 30 * wg[j].w +
                    16 * wg[j + 1].w - wg[j + 2].w) /
                   (12.0 * dell * dell);
      double rr = -wpp - ed.rp_over_r[2 * j] * wg[j].u - lf * wg[j].w;
      res = std::max(res, std::abs(rr));
    }
    ef.residual = res / (std::abs(lf) + 1.0);

    // map to the chart grid via cubic Hermite in ell
    ef.w.resize(ch.n);
    for (int i = 0; i < ch.n; ++i) {
      double ell = ch.f[i];
      int j = std::clamp(int(ell / dell), 0, Mf - 1);
      double t = (ell - j * dell) / dell;
      double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
      double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
      ef.w[i] = h00 * wg[j].w + h10 * dell * wg[j].u + h01 * wg[j + 1].w +
                h11 * dell * wg[j + 1].u;
    }
    double nrm = 0.0;
    for (int i = 0; i < ch.n; ++i) {
      double wt = (i == 0 || i == ch.n - 1) ? 0.5 : 1.0;
      nrm += wt * ef.w[i] * ef.w[i] * ch.rho[i] * ch.rho[i];
    }
    nrm = std::sqrt(nrm * ch.dx);
    int jmax = 0;
    for (int i = 1; i < ch.n; ++i)
      if (std::abs(ef.w[i]) > std::abs(ef.w[jmax])) jmax = i;
    double sgn = (ef.w[jmax] >= 0.0) ? 1.0 : -1.0;
    for (auto& v : ef.w) v *= sgn / nrm;
    ef.norm_rho = 1.0;
    out.push_back(std::move(ef));
  }

  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.lambda2 < b.lambda2; });
  // near-degenerate duplicates: keep the lower-residual one
  std::vector<RadialEigenfunction> dedup;
  for (auto& e : out) {
    if (!dedup.empty() &&
        std::abs(e.lambda2 - dedup.back().lambda2) < 1e-7 * (1.0 + e.lambda2)) {
      if (e.residual < dedup.back().residual) dedup.back() = std::move(e);
      continue;
    }
    dedup.push_back(std::move(e));
  }
  return dedup;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<RadialEigenfunction> radial_solve(const IsothermalChart& chart, int k,
                                              double window_lo, double window_hi) {
  if (window_hi <= window_lo)
    throw std::invalid_argument("radial_solve: empty window");
  k = std::abs(k);  // the ODE depends on k^2 only

  if (k == 0) return radial_solve_k0(chart, window_lo, window_hi);

  double k2 = double(k) * k;
  if (window_hi <= k2 * (1.0 + 1e-12)) return {};  // everything excluded
  if (window_lo < k2)
    throw WindowOutsideExclusion("radial_solve: window straddles k^2 = " +
                                 std::to_string(k2));
  if (chart.dx > 2.0 * kPi / (8.0 * std::sqrt(window_hi)))
    throw GridTooCoarse("radial_solve: fewer than 8 points per wavelength");

  Level coarse = chart_level(chart);
  Level fine = refined_level(chart);
  double lo_limit = k2 * (1.0 + 1e-12) + 1e-12;

  std::vector<RadialEigenfunction> out;
  for (double est : matrix_stage(chart, k, window_lo, window_hi)) {
    int stride = std::max(1, (chart.n - 1) / 4096);
    double d_m = chart.dx * stride;
    double delta = 0.5 + std::abs(est) * (std::abs(est) * d_m * d_m) / 4.0;
    double lc = polish_on_level(coarse, k, est, delta, lo_limit);
    double lf = polish_on_level(fine, k, est, delta, lo_limit);
    if (std::isnan(lc) || std::isnan(lf))
      throw NoConvergence("radial_solve: polishing failed near lambda2 = " +
                          std::to_string(est));
    double l2 = (16.0 * lf - lc) / 15.0;
    if (l2 <= window_lo || l2 >= window_hi) continue;
    if (l2 <= k2) continue;  // exclusion, never report lambda <= |k|
    out.push_back(build_eigenfunction(chart, fine, k, lf, l2));
  }

  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.lambda2 < b.lambda2; });
  std::vector<RadialEigenfunction> dedup;
  for (auto& e : out) {
    if (!dedup.empty() &&
        std::abs(e.lambda2 - dedup.back().lambda2) < 1e-7 * (1.0 + e.lambda2)) {
      std::fprintf(stderr,
                   "radial_solve: near-degenerate pair at k=%d, lambda2=%.12g; "
                   "keeping lower residual\n",
                   e.k, e.lambda2);
      if (e.residual < dedup.back().residual) dedup.back() = std::move(e);
      continue;
    }
    dedup.push_back(std::move(e));
  }
  return dedup;
}

int SpectralCluster::multiplicity() const {
  int m = 0;
  for (const auto& e : members) m += (e.k == 0) ? 1 : 2;
  return m;
}

Spectrum assemble_spectrum(const IsothermalChart& chart, int n_max, double A_config,
                           double search_pad) {
  if (n_max < 1) throw std::invalid_argument("assemble_spectrum: n_max < 1");
  if (A_config > 1.0)
    throw ClusterOverlap("assemble_spectrum: A_config > 1 would allow windows to "
                         "intersect");
  if (A_config <= 0.0) throw std::invalid_argument("assemble_spectrum: A_config <= 0");
  if (search_pad < 0.0)
    throw std::invalid_argument("assemble_spectrum: search_pad < 0");

  double top = (n_max + 0.5) * (n_max + 0.5) + A_config + search_pad;
  double lo_global = 0.25 - A_config - search_pad;
  int k_top = int(std::floor(std::sqrt(top)));

  std::vector<std::vector<RadialEigenfunction>> per_k(std::size_t(k_top) + 1);
  par::parallel_for(k_top + 1, [&](std::int64_t k) {
    double lo = (k == 0) ? lo_global
                         : std::max(double(k) * double(k) * (1.0 + 1e-12) + 1e-9,
                                    lo_global);
    per_k[std::size_t(k)] = radial_solve(chart, int(k), lo, top);
  });

  Spectrum sp;
  sp.A_config = A_config;
  sp.clusters.resize(std::size_t(n_max) + 1);
  auto chart_copy = std::make_shared<const IsothermalChart>(chart);
  for (int n = 0; n <= n_max; ++n) {
    sp.clusters[n].n = n;
    sp.clusters[n].h = 1.0 / (n + 0.5);
    sp.clusters[n].chart = chart_copy;
  }
  for (auto& kv : per_k) {
    for (auto& e : kv) {
      int n = std::clamp(int(std::lround(std::sqrt(std::max(e.lambda2, 0.0)) - 0.5)),
                         0, n_max);
      double dev = std::abs(e.lambda2 - (n + 0.5) * (n + 0.5));
      if (dev < A_config) {
        sp.clusters[n].A_observed = std::max(sp.clusters[n].A_observed, dev);
        sp.clusters[n].members.push_back(std::move(e));
      } else {
        sp.outliers.push_back(std::move(e));
      }
    }
  }
  for (auto& cl : sp.clusters)
    std::sort(cl.members.begin(), cl.members.end(), [](const auto& a, const auto& b) {
      return (a.k != b.k) ? a.k < b.k : a.lambda2 < b.lambda2;
    });
  return sp;
}

AdmissibleSet admissible_set(const SpectralCluster& cluster, double epsilon) {
  AdmissibleSet as;
  as.epsilon = epsilon;
  for (const auto& e : cluster.members) {
    double E = 1.0 - cluster.h * cluster.h * double(e.k) * double(e.k);
    if (std::abs(E) <= epsilon) as.k_set.push_back(e.k);
  }
  return as;
}

double wronskian_check(const IsothermalChart& chart, const RadialEigenfunction& w1,
                       const RadialEigenfunction& w2) {
  if (w1.k != w2.k ||
      std::abs(w1.lambda2 - w2.lambda2) > 1e-10 * (1.0 + std::abs(w1.lambda2)))
    throw MismatchedODE("wronskian_check: different (k, lambda2)");
  if (int(w1.w.size()) != chart.n || int(w2.w.size()) != chart.n)
    throw std::invalid_argument("wronskian_check: grid size mismatch");

  const double d = chart.dx, d2 = d * d;
  const double k2 = double(w1.k) * w1.k, l2 = w1.lambda2;
  auto c_of = [&](int j) {
    double rho = chart.rho[j];
    return 1.0 - d2 * (k2 - l2 * rho * rho) / 12.0;
  };
  // discrete Wronskian K_j = (c w1)_j (c w2)_{j+1} - (c w1)_{j+1} (c w2)_j,
  // exactly conserved by the Numerov recurrence; deviation measured against
  // the local term magnitude (inverse-variance weighted mean)
  int n = chart.n;
  std::vector<double> K(n - 1), sc(n - 1);
  for (int j = 0; j + 1 < n; ++j) {
    double a0 = c_of(j) * w1.w[j], a1 = c_of(j + 1) * w1.w[j + 1];
    double b0 = c_of(j) * w2.w[j], b1 = c_of(j + 1) * w2.w[j + 1];
    K[j] = (a0 * b1 - a1 * b0) / d;
    sc[j] = (std::abs(a0 * b1) + std::abs(a1 * b0)) / d + 1e-300;
  }
  double swt = 0.0, smean = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    swt += 1.0 / sc[j];
    smean += K[j] / sc[j];
  }
  double mean = smean / swt;
  double dev = 0.0;
  for (int j = 0; j + 1 < n; ++j)
    dev = std::max(dev, std::abs(K[j] - mean) / sc[j]);
  return dev;
}

double apply_K(const Spectrum& spectrum, const RadialEigenfunction& member) {
  // membership = falling inside a configured cluster window; outliers and
  // values beyond the assembled range are orphans
  for (const auto& cl : spectrum.clusters)
    if (std::abs(member.lambda2 - cl.center()) < spectrum.A_config)
      return cl.center() - member.lambda2;
  throw Orphan("apply_K: member (k = " + std::to_string(member.k) +
               ", lambda2 = " + std::to_string(member.lambda2) +
               ") not assigned to any cluster");
}

RadialEigenfunction radial_ivp_solution(const IsothermalChart& chart, int k,
                                        double lambda2, bool from_left,
                                        bool growing) {
  Level lv = chart_level(chart);
  const int n = lv.n;
  const double d = lv.d, d2 = d * d;
  auto Q = [&](int j) { return double(k) * k - lambda2 * lv.rho2[j]; };
  auto c_of = [&](int j) { return 1.0 - d2 * Q(j) / 12.0; };
  auto kappa = [&](int j) { return std::sqrt(std::max(Q(j), 0.0)); };

  std::vector<double> w(n);
  double sgn = growing ? 1.0 : -1.0;
  if (from_left) {
    w[0] = 1.0;
    w[1] = std::exp(std::clamp(sgn * 0.5 * d * (kappa(0) + kappa(1)), -300.0, 300.0));
    for (int j = 1; j + 1 < n; ++j) {
      w[j + 1] =
          ((12.0 - 10.0 * c_of(j)) * w[j] - c_of(j - 1) * w[j - 1]) / c_of(j + 1);
      if (std::abs(w[j + 1]) > 1e120)
        for (int t = 0; t <= j + 1; ++t) w[t] *= 1e-120;
    }
  } else {
    w[n - 1] = 1.0;
    w[n - 2] =
        std::exp(std::clamp(sgn * 0.5 * d * (kappa(n - 1) + kappa(n - 2)), -300.0,
                            300.0));
    for (int j = n - 2; j > 0; --j) {
      w[j - 1] =
          ((12.0 - 10.0 * c_of(j)) * w[j] - c_of(j + 1) * w[j + 1]) / c_of(j - 1);
      if (std::abs(w[j - 1]) > 1e120)
        for (int t = n - 1; t >= j - 1; --t) w[t] *= 1e-120;
    }
  }
  double mx = 0.0;
  for (double v : w) mx = std::max(mx, std::abs(v));
  for (auto& v : w) v /= mx;

  RadialEigenfunction ef;
  ef.k = k;
  ef.lambda2 = lambda2;
  ef.w = std::move(w);
  ef.norm_rho = 0.0;  // IVP solution, not normalized in rho^2 dx
  return ef;
}

}  // namespace zoll
