#pragma once
// Zoll surfaces of revolution: meridian profile and isothermal chart.
//
// A surface is described by an odd perturbation h(s) = sum_j alpha_j sin(j pi s)
// of the round metric, h(cos theta) entering the meridian arc length
// ell(theta) = int_0^theta (1 + h(cos t)) dt, with parallel radius r = sin theta.
// The isothermal coordinate x solves f'(x) = r(f(x)), f(0) = ell0, giving the
// conformal factor rho = f' and the effective potential V = 1 - rho^2.

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zoll {

struct MetricViolation : std::runtime_error {
  explicit MetricViolation(const std::string& m) : std::runtime_error(m) {}
};
struct GridTooCoarse : std::runtime_error {
  explicit GridTooCoarse(const std::string& m) : std::runtime_error(m) {}
};
struct IntegrationFailure : std::runtime_error {
  explicit IntegrationFailure(const std::string& m) : std::runtime_error(m) {}
};

class SurfaceProfile {
 public:
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<double>& theta_grid() const { return theta_; }
  const std::vector<double>& ell_of_theta() const { return ell_; }
  const std::vector<double>& r_of_theta() const { return r_; }

  double ell0() const { return ell0_; }
  double c() const { return c_; }
  double cV() const { return 2.0 * c_; }
  double meridian_length() const { return ell_.back(); }

  // h(s) = sum_j alpha_j sin(j pi s)
  double h(double s) const;
  // dh/ds
  double dh(double s) const;

  // ell(theta) for arbitrary theta in [0, pi], quadrature-accurate.
  double ell_at(double theta) const;
  // inverse of ell(theta), Newton-refined
  double theta_from_ell(double ell) const;

  double r_at_ell(double ell) const;       // sin(theta(ell))
  double dr_at_ell(double ell) const;      // dr/dell = cos(theta)/(1 + h(cos theta))

 private:
  friend SurfaceProfile validate_profile(std::span<const double>, int);
  std::vector<double> coeffs_;
  std::vector<double> theta_, ell_, r_;
  double dtheta_ = 0.0;
  double ell0_ = 0.0;
  double c_ = 0.0;
};

// Validates |h| < 1 and tabulates meridian data.
SurfaceProfile validate_profile(std::span<const double> coefficients, int grid_size);

struct EquatorData {
  double ell0;
  double c;
  double cV;
};
EquatorData equator_data(const SurfaceProfile& profile);

struct IsothermalChart {
  std::shared_ptr<const SurfaceProfile> profile;
  double X = 0.0;
  int n = 0;        // number of grid points (odd, center at x = 0)
  double dx = 0.0;
  std::vector<double> x, f, rho, V;
  double cV = 0.0;
  double ell0 = 0.0;

  // f at the midpoint between nodes i and i+1 (two-point Hermite, f' = rho).
  double f_mid(int i) const;
  // inverse of the monotone map x -> f(x); clamps to [-X, X]
  double x_from_ell(double ell) const;
  // 2 pi int rho^2 dx (trapezoid) = surface area
  double area() const;
};

IsothermalChart build_chart(const SurfaceProfile& profile, double X, int n_points);
IsothermalChart build_chart(std::shared_ptr<const SurfaceProfile> profile, double X,
                            int n_points);

}  // namespace zoll
