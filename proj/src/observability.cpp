#include "zoll/observability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace zoll {

namespace {

// cluster bookkeeping from the eigenvalue alone: n is the nearest half-integer
// square root, h = (n + 1/2)^{-1}
struct Regime {
  int n;
  double h, E;
};
Regime regime_of(const RadialEigenfunction& w) {
  Regime r;
  r.n = std::max(0L, std::lround(std::sqrt(std::max(w.lambda2, 0.0)) - 0.5));
  r.h = 1.0 / (r.n + 0.5);
  r.E = 1.0 - r.h * r.h * double(w.k) * double(w.k);
  return r;
}

double trapezoid_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

}  // namespace

MassRatio mass_ratio(const RadialEigenfunction& w, const IsothermalChart& chart) {
  const int n = chart.n, mid = (n - 1) / 2;
  double num_w = 0.0, den_w = 0.0, num_u = 0.0, den_u = 0.0;
  for (int i = 0; i < n; ++i) {
    double wt = trapezoid_weight(i, n);
    double ww = w.w[i] * w.w[i];
    double r2 = chart.rho[i] * chart.rho[i];
    den_w += wt * ww * r2;
    den_u += wt * ww;
    // indicator 1_{x>0} with the interface node x = 0 weighted 1/2
    double up = (i > mid) ? wt : (i == mid ? 0.5 : 0.0);
    num_w += up * ww * r2;
    num_u += up * ww;
  }
  return {num_w / den_w, num_u / den_u};
}

ScanReport observability_scan(const std::vector<SpectralCluster>& clusters,
                              double epsilon) {
  // epsilon = 0 is legal and yields an empty admissible set unless some
  // member has h^2 k^2 = 1 exactly
  if (epsilon < 0.0 || epsilon >= 1.0)
    throw std::invalid_argument("observability_scan: epsilon outside [0, 1)");

  ScanReport rep;
  rep.min_ratio = 2.0;
  std::map<int, double> per_n_min;
  // the chart is shared by every member's parent; clusters built from the same
  // chart are required here
  for (const auto& cl : clusters) {
    for (const auto& m : cl.members) {
      double E = 1.0 - cl.h * cl.h * double(m.k) * double(m.k);
      if (std::abs(E) > epsilon) continue;
      if (!cl.chart)
        throw std::invalid_argument("observability_scan: cluster lacks its chart");
      double r = mass_ratio(m, *cl.chart).weighted;
      rep.entries.push_back({cl.n, m.k, E, r});
      auto it = per_n_min.find(cl.n);
      if (it == per_n_min.end() || r < it->second) per_n_min[cl.n] = r;
      if (r < rep.min_ratio) {
        rep.min_ratio = r;
        rep.argmin_n = cl.n;
        rep.argmin_k = m.k;
      }
    }
  }
  if (rep.entries.empty())
    throw EmptyAdmissibleSet("observability_scan: no member with |1-h^2k^2| <= " +
                             std::to_string(epsilon));

  if (per_n_min.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = double(per_n_min.size());
    for (auto& [n, r] : per_n_min) {
      sx += n;
      sy += r;
      sxx += double(n) * n;
      sxy += n * r;
    }
    rep.trend_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return rep;
}

AgmonEnvelope agmon_envelope(const RadialEigenfunction& w,
                             const IsothermalChart& chart, double epsilon_a) {
  if (epsilon_a <= 0.0 || epsilon_a >= 0.5)
    throw std::invalid_argument("agmon_envelope: epsilon_a outside (0, 0.5)");
  AgmonEnvelope env;
  env.epsilon_a = epsilon_a;
  double h = 1.0 / std::sqrt(w.lambda2);
  env.E = (w.lambda2 - double(w.k) * w.k) / w.lambda2;  // 1 - h^2 k^2 at h = 1/lambda

  const int n = chart.n, mid = (n - 1) / 2;
  env.phase.assign(n, 0.0);
  auto q = [&](int i) { return std::sqrt(std::max(chart.V[i] - env.E, 0.0)); };
  for (int i = mid; i + 1 < n; ++i)
    env.phase[i + 1] = env.phase[i] + 0.5 * chart.dx * (q(i) + q(i + 1));
  for (int i = mid; i - 1 >= 0; --i)
    env.phase[i - 1] = env.phase[i] + 0.5 * chart.dx * (q(i) + q(i - 1));
  for (auto& p : env.phase) p *= (1.0 - epsilon_a);
  return env;
}

double agmon_check(const RadialEigenfunction& w, const IsothermalChart& chart,
                   double epsilon_a) {
  AgmonEnvelope env = agmon_envelope(w, chart, epsilon_a);
  double h = 1.0 / std::sqrt(w.lambda2);
  double allowed_sup = -1e300, total_sup = -1e300;
  double e_cut = std::max(env.E, 0.0) + 1e-12;
  for (int i = 0; i < chart.n; ++i) {
    double a = std::abs(w.w[i]);
    if (a == 0.0) continue;
    double lg = std::log(a);
    total_sup = std::max(total_sup, lg + env.phase[i] / h);
    if (chart.V[i] <= e_cut) allowed_sup = std::max(allowed_sup, lg);
  }
  return total_sup - allowed_sup;
}

HermiteReport hermite_compare(const RadialEigenfunction& w,
                              const IsothermalChart& chart, bool strict_regime) {
  Regime rg = regime_of(w);
  if (strict_regime && rg.E / rg.h > 5.0)
    throw NotNearEquatorRegime("hermite_compare: E/h = " +
                               std::to_string(rg.E / rg.h) + " > 5");

  const int n = chart.n;
  const double s = std::pow(chart.cV, 0.25) / std::sqrt(rg.h);  // z = s x
  const double dz = s * chart.dx;

  // rescaled eigenfunction, normalized in dz
  std::vector<double> wt(n);
  double nrm = 0.0;
  for (int i = 0; i < n; ++i) {
    wt[i] = w.w[i];
    nrm += trapezoid_weight(i, n) * wt[i] * wt[i];
  }
  nrm = std::sqrt(nrm * dz);
  for (auto& v : wt) v /= nrm;

  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += trapezoid_weight(i, n) * a[i] * b[i];
    return acc * dz;
  };

  // oscillator eigenfunctions by the normalized three-term recurrence,
  // then numerically orthonormalized on this grid
  const int n_basis = 64;
  std::vector<std::vector<double>> basis(n_basis, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    double z = s * chart.x[i];
    basis[0][i] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * z * z);
  }
  for (int b = 1; b < n_basis; ++b)
    for (int i = 0; i < n; ++i) {
      double z = s * chart.x[i];
      double prev = (b >= 2) ? basis[b - 2][i] : 0.0;
      basis[b][i] = z * std::sqrt(2.0 / b) * basis[b - 1][i] -
                    std::sqrt(double(b - 1) / b) * prev;
    }
  for (int b = 0; b < n_basis; ++b) {
    for (int a = 0; a < b; ++a) {
      double c = dot(basis[b], basis[a]);
      for (int i = 0; i < n; ++i) basis[b][i] -= c * basis[a][i];
    }
    double bn = std::sqrt(dot(basis[b], basis[b]));
    for (int i = 0; i < n; ++i) basis[b][i] /= bn;
  }

  std::vector<double> alpha(n_basis);
  int i0 = 0;
  for (int b = 0; b < n_basis; ++b) {
    alpha[b] = dot(wt, basis[b]);
    if (std::abs(alpha[b]) > std::abs(alpha[i0])) i0 = b;
  }

  HermiteReport rep;
  rep.i0 = i0;
  rep.F = rg.E / (rg.h * std::sqrt(chart.cV));
  double sgn = (alpha[i0] >= 0.0) ? 1.0 : -1.0;
  double e2 = 0.0, r2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double d1 = wt[i] - sgn * basis[i0][i];
    double rec = 0.0;
    for (int b = 0; b < n_basis; ++b) rec += alpha[b] * basis[b][i];
    double d2 = wt[i] - rec;
    e2 += trapezoid_weight(i, n) * d1 * d1;
    r2 += trapezoid_weight(i, n) * d2 * d2;
  }
  rep.l2_error = std::sqrt(e2 * dz);
  rep.recon_error = std::sqrt(r2 * dz);

  const int mid = (n - 1) / 2;
  double upper = 0.0;
  for (int i = mid; i < n; ++i) {
    double up = (i == mid) ? 0.5 : trapezoid_weight(i, n);
    upper += up * wt[i] * wt[i];
  }
  rep.parity_defect = std::abs(upper * dz - 0.5);
  return rep;
}

HusimiField husimi_transform(const std::vector<std::complex<double>>& samples,
                             double z_min, double dz, double hbar, double band) {
  const int n = int(samples.size());
  const int ng = 81;
  HusimiField f;
  f.hbar_eff = hbar;
  f.z.resize(ng);
  f.zeta.resize(ng);
  for (int i = 0; i < ng; ++i) f.z[i] = f.zeta[i] = -2.0 + 4.0 * i / (ng - 1);
  f.density.assign(std::size_t(ng) * ng, 0.0);

  const double norm = std::pow(std::numbers::pi * hbar, -0.25);
  const double cut = 8.5 * std::sqrt(hbar);  // Gaussian support window
  std::vector<double> g(n);
  for (int iz = 0; iz < ng; ++iz) {
    double z0 = f.z[iz];
    int j_lo = std::clamp(int((z0 - cut - z_min) / dz), 0, n - 1);
    int j_hi = std::clamp(int((z0 + cut - z_min) / dz) + 1, 0, n - 1);
    for (int j = j_lo; j <= j_hi; ++j) {
      double z = z_min + j * dz;
      g[j] = std::exp(-(z - z0) * (z - z0) / (2.0 * hbar));
    }
    for (int iv = 0; iv < ng; ++iv) {
      double zeta0 = f.zeta[iv];
      // phase factor advanced by recurrence, one complex multiply per node
      std::complex<double> ph =
          std::exp(std::complex<double>(0.0, -zeta0 * (z_min + j_lo * dz) / hbar));
      std::complex<double> step =
          std::exp(std::complex<double>(0.0, -zeta0 * dz / hbar));
      std::complex<double> acc = 0.0;
      for (int j = j_lo; j <= j_hi; ++j) {
        acc += samples[j] * g[j] * ph;
        ph *= step;
      }
      acc *= norm * dz;
      f.density[std::size_t(iv) * ng + iz] = std::norm(acc);
    }
  }

  double cell = (4.0 / (ng - 1)) * (4.0 / (ng - 1));
  double total = 0.0, ring = 0.0, half = 0.0;
  for (int iv = 0; iv < ng; ++iv)
    for (int iz = 0; iz < ng; ++iz) {
      double wt = trapezoid_weight(iv, ng) * trapezoid_weight(iz, ng) * cell;
      double m = wt * f.density[std::size_t(iv) * ng + iz];
      total += m;
      double z0 = f.z[iz], zeta0 = f.zeta[iv];
      if (std::abs(z0 * z0 + zeta0 * zeta0 - 1.0) <= band) ring += m;
      if (z0 > 0.0)
        half += m;
      else if (z0 == 0.0)
        half += 0.5 * m;
    }
  for (auto& d : f.density) d /= total;
  f.ring_mass = ring / total;
  f.half_mass = half / total;
  return f;
}

HusimiField husimi(const RadialEigenfunction& w, const IsothermalChart& chart,
                   double band, bool strict_regime) {
  Regime rg = regime_of(w);
  if (strict_regime && rg.E / rg.h < 10.0)
    throw NotSemiclassicalRegime("husimi: E/h = " + std::to_string(rg.E / rg.h) +
                                 " < 10");
  if (rg.E <= 0.0)
    throw NotSemiclassicalRegime("husimi: E <= 0");

  double hbar = std::sqrt(chart.cV) * rg.h / rg.E;
  double s = std::sqrt(chart.cV / rg.E);  // z = s x, allowed region |z| <= 1
  double dz = s * chart.dx;

  std::vector<std::complex<double>> samples(chart.n);
  double nrm = 0.0;
  for (int i = 0; i < chart.n; ++i) {
    samples[i] = w.w[i];
    nrm += trapezoid_weight(i, chart.n) * w.w[i] * w.w[i];
  }
  nrm = std::sqrt(nrm * dz);
  for (auto& v : samples) v /= nrm;

  return husimi_transform(samples, -s * chart.X, dz, hbar, band);
}

}  // namespace zoll
