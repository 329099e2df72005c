#pragma once
// Eigenfunction localization diagnostics: hemi-surface mass ratios, Agmon
// envelope bounds, the harmonic-oscillator limit at the equator, and Husimi
// phase-space densities for the semiclassical regime.
//
// Regime bookkeeping: a cluster member carries E = 1 - h^2 k^2 with
// h = (n + 1/2)^{-1}. E/h <= 5 is the near-equator (oscillator) regime,
// E/h >= 10 the semiclassical one; the gap is evaluated by both diagnostics
// with strict_regime = false.

#include <complex>
#include <stdexcept>
#include <vector>

#include "zoll/geometry.hpp"
#include "zoll/spectral.hpp"

namespace zoll {

struct EmptyAdmissibleSet : std::runtime_error {
  explicit EmptyAdmissibleSet(const std::string& m) : std::runtime_error(m) {}
};
struct NotNearEquatorRegime : std::runtime_error {
  explicit NotNearEquatorRegime(const std::string& m) : std::runtime_error(m) {}
};
struct NotSemiclassicalRegime : std::runtime_error {
  explicit NotSemiclassicalRegime(const std::string& m) : std::runtime_error(m) {}
};

struct MassRatio {
  double weighted = 0.0;    // || 1_{x>0} w ||^2 / ||w||^2 in rho^2 dx
  double unweighted = 0.0;  // same in plain dx
};
MassRatio mass_ratio(const RadialEigenfunction& w, const IsothermalChart& chart);

struct ScanEntry {
  int n = 0;
  int k = 0;
  double E = 0.0;
  double ratio = 0.0;
};
struct ScanReport {
  double min_ratio = 0.0;
  int argmin_n = 0;
  int argmin_k = 0;
  double trend_slope = 0.0;  // least-squares slope of per-n minimum vs n
  std::vector<ScanEntry> entries;
};
ScanReport observability_scan(const std::vector<SpectralCluster>& clusters,
                              double epsilon);

struct AgmonEnvelope {
  double epsilon_a = 0.0;
  double E = 0.0;
  std::vector<double> phase;  // Phi^eps(x) on the chart grid
};
AgmonEnvelope agmon_envelope(const RadialEigenfunction& w,
                             const IsothermalChart& chart, double epsilon_a);

// sup_x [log|w| + Phi^eps/h] minus the sup of log|w| over the classically
// allowed region {V <= E}; h = 1/lambda
double agmon_check(const RadialEigenfunction& w, const IsothermalChart& chart,
                   double epsilon_a);

struct HermiteReport {
  int i0 = 0;
  double F = 0.0;         // E * cV^{-1/2} / h, limit 2 i0 + 1
  double l2_error = 0.0;  // distance to the i0-th oscillator eigenfunction
  double parity_defect = 0.0;
  double recon_error = 0.0;  // defect of the 64-term oscillator reconstruction
};
HermiteReport hermite_compare(const RadialEigenfunction& w,
                              const IsothermalChart& chart,
                              bool strict_regime = true);

struct HusimiField {
  double hbar_eff = 0.0;
  std::vector<double> z, zeta;  // grid axes
  std::vector<double> density;  // row-major [zeta][z], normalized to mass 1
  double ring_mass = 0.0;       // fraction with |z^2 + zeta^2 - 1| <= band
  double half_mass = 0.0;       // fraction with z > 0
};
HusimiField husimi(const RadialEigenfunction& w, const IsothermalChart& chart,
                   double band, bool strict_regime = true);

// core transform on already-rescaled complex samples with uniform spacing dz;
// exposed for synthetic inputs (plane-phase tests)
HusimiField husimi_transform(const std::vector<std::complex<double>>& samples,
                             double z_min, double dz, double hbar, double band);

}  // namespace zoll
