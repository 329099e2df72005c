#include "zoll/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace zoll {

namespace {

constexpr double kPi = std::numbers::pi;

// 4-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kGlX[4] = {-0.8611363115940526, -0.3399810435848563,
                            0.3399810435848563, 0.8611363115940526};
constexpr double kGlW[4] = {0.3478548451374538, 0.6521451548625461,
                            0.6521451548625461, 0.3478548451374538};

}  // namespace

double SurfaceProfile::h(double s) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < coeffs_.size(); ++j)
    acc += coeffs_[j] * std::sin((double(j) + 1.0) * kPi * s);
  return acc;
}

double SurfaceProfile::dh(double s) const {
  double acc = 0.0;
  for (std::size_t j = 0; j < coeffs_.size(); ++j) {
    double w = (double(j) + 1.0) * kPi;
    acc += coeffs_[j] * w * std::cos(w * s);
  }
  return acc;
}

double SurfaceProfile::ell_at(double theta) const {
  theta = std::clamp(theta, 0.0, kPi);
  // nearest tabulated node at or below theta, then a short GL4 panel
  int i = std::clamp(int(theta / dtheta_), 0, int(theta_.size()) - 1);
  double a = theta_[i];
  double acc = ell_[i];
  double half = 0.5 * (theta - a);
  double mid = 0.5 * (theta + a);
  for (int q = 0; q < 4; ++q) {
    double t = mid + half * kGlX[q];
    acc += half * kGlW[q] * (1.0 + h(std::cos(t)));
  }
  return acc;
}

double SurfaceProfile::theta_from_ell(double ell) const {
  ell = std::clamp(ell, 0.0, ell_.back());
  // bracket by binary search on the tabulated cumulative arc length
  auto it = std::upper_bound(ell_.begin(), ell_.end(), ell);
  int i = std::clamp(int(it - ell_.begin()) - 1, 0, int(ell_.size()) - 2);
  double t0 = theta_[i], t1 = theta_[i + 1];
  double u = (ell - ell_[i]) / (ell_[i + 1] - ell_[i]);
  double theta = t0 + u * (t1 - t0);
  // Newton: ell'(theta) = 1 + h(cos theta) >= 1 - max|h| > 0
  for (int it2 = 0; it2 < 2; ++it2) {
    double g = ell_at(theta) - ell;
    double dg = 1.0 + h(std::cos(theta));
    theta -= g / dg;
    theta = std::clamp(theta, 0.0, kPi);
  }
  return theta;
}

double SurfaceProfile::r_at_ell(double ell) const {
  return std::sin(theta_from_ell(ell));
}

double SurfaceProfile::dr_at_ell(double ell) const {
  double theta = theta_from_ell(ell);
  return std::cos(theta) / (1.0 + h(std::cos(theta)));
}

SurfaceProfile validate_profile(std::span<const double> coefficients, int grid_size) {
  if (grid_size < 64)
    throw GridTooCoarse("validate_profile: grid_size = " + std::to_string(grid_size) +
                        " < 64");

  SurfaceProfile p;
  p.coeffs_.assign(coefficients.begin(), coefficients.end());

  // metric positivity |h| < 1 on [-1, 1]; h odd, so scan [0, 1] densely and
  // refine around the sampled maximum
  {
    const int m = 1 << 14;
    double best = 0.0, sbest = 0.0;
    for (int i = 0; i <= m; ++i) {
      double s = double(i) / m;
      double v = std::abs(p.h(s));
      if (v > best) {
        best = v;
        sbest = s;
      }
    }
    double lo = std::max(0.0, sbest - 1.0 / m), hi = std::min(1.0, sbest + 1.0 / m);
    for (int it = 0; it < 60; ++it) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (std::abs(p.h(m1)) < std::abs(p.h(m2)))
        lo = m1;
      else
        hi = m2;
    }
    best = std::max(best, std::abs(p.h(0.5 * (lo + hi))));
    if (best >= 1.0)
      throw MetricViolation("validate_profile: max|h| = " + std::to_string(best) +
                            " >= 1");
  }

  // tabulate theta, ell(theta), r(theta); cumulative GL4 per interval
  int n = grid_size;
  p.theta_.resize(n);
  p.ell_.resize(n);
  p.r_.resize(n);
  p.dtheta_ = kPi / (n - 1);
  for (int i = 0; i < n; ++i) {
    p.theta_[i] = i * p.dtheta_;
    p.r_[i] = std::sin(p.theta_[i]);
  }
  p.ell_[0] = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    double a = p.theta_[i], b = p.theta_[i + 1];
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double acc = 0.0;
    for (int q = 0; q < 4; ++q)
      acc += half * kGlW[q] * (1.0 + p.h(std::cos(mid + half * kGlX[q])));
    p.ell_[i + 1] = p.ell_[i] + acc;
  }

  // oddness of h forces total meridian length pi
  if (std::abs(p.ell_.back() - kPi) > 1e-10)
    throw MetricViolation("validate_profile: meridian length " +
                          std::to_string(p.ell_.back()) + " != pi");

  p.ell0_ = p.ell_at(kPi / 2.0);

  // c = -r''(ell0)/2 in closed form: theta(ell0) = pi/2 exactly, and there
  // r'' = (-sin(theta) g - cos(theta) g_theta)/g^3 with g = 1 + h(cos theta)
  // collapses to -1/(1 + h(0))^2
  {
    double g = 1.0 + p.h(0.0);
    p.c_ = 0.5 / (g * g);
  }

  return p;
}

EquatorData equator_data(const SurfaceProfile& profile) {
  return EquatorData{profile.ell0(), profile.c(), profile.cV()};
}

double IsothermalChart::f_mid(int i) const {
  // two-point Hermite at the midpoint; f' = rho at both endpoints
  return 0.5 * (f[i] + f[i + 1]) + 0.125 * dx * (rho[i] - rho[i + 1]);
}

double IsothermalChart::x_from_ell(double ell) const {
  if (ell <= f.front()) return -X;
  if (ell >= f.back()) return X;
  auto it = std::upper_bound(f.begin(), f.end(), ell);
  int i = std::clamp(int(it - f.begin()) - 1, 0, n - 2);
  double xx = x[i] + dx * (ell - f[i]) / (f[i + 1] - f[i]);
  // Newton on f(xx) = ell with f evaluated by Hermite interpolation, f' = r(f)
  for (int k = 0; k < 6; ++k) {
    double t = (xx - x[i]) / dx;
    if (t < 0.0 || t > 1.0) {
      i = std::clamp(int((xx + X) / dx), 0, n - 2);
      t = (xx - x[i]) / dx;
    }
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    double fv = h00 * f[i] + h10 * dx * rho[i] + h01 * f[i + 1] + h11 * dx * rho[i + 1];
    double fp = profile->r_at_ell(fv);
    double step = (fv - ell) / std::max(fp, 1e-300);
    xx -= step;
    xx = std::clamp(xx, -X, X);
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(xx))) break;
  }
  return xx;
}

double IsothermalChart::area() const {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += w * rho[i] * rho[i];
  }
  return 2.0 * kPi * acc * dx;
}

IsothermalChart build_chart(std::shared_ptr<const SurfaceProfile> profile, double X,
                            int n_points) {
  if (X < 5.0) throw GridTooCoarse("build_chart: X < 5");
  if (n_points < 512) throw GridTooCoarse("build_chart: n_points < 512");
  if (n_points % 2 == 0) n_points += 1;  // symmetric grid with a node at x = 0

  IsothermalChart ch;
  ch.profile = profile;
  ch.X = X;
  ch.n = n_points;
  ch.dx = 2.0 * X / (n_points - 1);
  ch.cV = profile->cV();
  ch.ell0 = profile->ell0();
  ch.x.resize(n_points);
  ch.f.resize(n_points);
  ch.rho.resize(n_points);
  ch.V.resize(n_points);

  const int mid = (n_points - 1) / 2;
  for (int i = 0; i < n_points; ++i) ch.x[i] = -X + i * ch.dx;

  auto rhs = [&](double fv) { return profile->r_at_ell(fv); };
  auto rk4 = [&](double fv, double hstep) {
    double k1 = rhs(fv);
    double k2 = rhs(fv + 0.5 * hstep * k1);
    double k3 = rhs(fv + 0.5 * hstep * k2);
    double k4 = rhs(fv + hstep * k3);
    return fv + hstep / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  ch.f[mid] = profile->ell0();
  for (int i = mid; i + 1 < n_points; ++i) {
    ch.f[i + 1] = rk4(ch.f[i], ch.dx);
    if (!std::isfinite(ch.f[i + 1]) || ch.f[i + 1] >= kPi || ch.f[i + 1] <= 0.0)
      throw IntegrationFailure("build_chart: f left (0, pi)");
  }
  for (int i = mid; i - 1 >= 0; --i) {
    ch.f[i - 1] = rk4(ch.f[i], -ch.dx);
    if (!std::isfinite(ch.f[i - 1]) || ch.f[i - 1] >= kPi || ch.f[i - 1] <= 0.0)
      throw IntegrationFailure("build_chart: f left (0, pi)");
  }
  for (int i = 0; i < n_points; ++i) {
    ch.rho[i] = profile->r_at_ell(ch.f[i]);
    ch.V[i] = 1.0 - ch.rho[i] * ch.rho[i];
  }
  return ch;
}

IsothermalChart build_chart(const SurfaceProfile& profile, double X, int n_points) {
  return build_chart(std::make_shared<SurfaceProfile>(profile), X, n_points);
}

}  // namespace zoll
