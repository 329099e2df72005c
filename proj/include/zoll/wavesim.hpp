#pragma once
// Damped wave evolution in modal form. Azimuthal modes decouple for
// phi-independent damping; each k-block
//     rho^2 u_tt = (d_xx - k^2) u - rho^2 a(x) u_t
// advances by implicit midpoint, which conserves the discrete energy exactly
// when a = 0 and satisfies an exact per-step dissipation identity otherwise.
// The k = 0 block lives on a cell-centered ell grid with natural (r = 0)
// Neumann pole conditions, matching the spectral module.

#include <complex>
#include <stdexcept>
#include <vector>

#include "zoll/damping.hpp"
#include "zoll/geometry.hpp"
#include "zoll/spectral.hpp"

namespace zoll {

struct CFLViolation : std::runtime_error {
  explicit CFLViolation(const std::string& m) : std::runtime_error(m) {}
};
struct DegenerateFit : std::runtime_error {
  explicit DegenerateFit(const std::string& m) : std::runtime_error(m) {}
};

struct ModalBlock {
  int k = 0;
  // k != 0: samples on the chart x-grid; k = 0: samples at ell cell centers
  std::vector<std::complex<double>> u, v;
};

struct ModalWaveState {
  std::vector<ModalBlock> blocks;
  double lambda_max = 0.0;  // highest retained frequency, for the dt check
};

// single computed eigenmode as initial data; u = amp*w, v = vel*w
ModalWaveState state_from_mode(const IsothermalChart& chart,
                               const RadialEigenfunction& mode, double amp = 1.0,
                               double vel = 0.0);

// seeded random superposition of all spectrum members (band limit n_max)
ModalWaveState random_band_limited(const IsothermalChart& chart,
                                   const Spectrum& spectrum, std::uint64_t seed);

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energy;       // E(t_j)
  std::vector<double> dissipation;  // cumulative int int a |u_t|^2
  double fitted_beta = 0.0;         // log-linear fit over the second half
  double fitted_C = 0.0;
};

EnergyTrace evolve(const IsothermalChart& chart, const ModalWaveState& state,
                   const DampingSpec& damping, double T, double dt);

// undamped dynamics; the damping region only observes, so the dissipation
// column holds int_0^t int a|u_t|^2 while the energy stays constant
EnergyTrace evolve_observed(const IsothermalChart& chart,
                            const ModalWaveState& state,
                            const DampingSpec& observer, double T, double dt);

// max_t |E(t) - E(0) + dissipation(t)| / E(0)
double energy_identity_residual(const EnergyTrace& trace);

struct DecayFit {
  double beta = 0.0;
  double C = 0.0;  // E(t) ~ C e^{-beta t}
  double r2 = 0.0;
};
DecayFit fit_decay(const EnergyTrace& trace, double t_lo, double t_hi);

// undamped evolution with the damping region acting as a pure observer:
// ratio = int_0^T int a|u_t|^2 / E(0) per seeded random sample
struct ObservabilityReport {
  double worst_ratio = 0.0;
  std::vector<double> per_sample;
};
ObservabilityReport observability_experiment(const IsothermalChart& chart,
                                             const DampingSpec& damping,
                                             int ensemble, double T,
                                             const Spectrum& spectrum,
                                             std::uint64_t seed = 1);

}  // namespace zoll
