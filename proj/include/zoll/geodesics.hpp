#pragma once
// Geodesic flow in the (ell, phi) surface-of-revolution coordinates.
// Hamiltonian H = (p_ell^2 + p_phi^2 / r(ell)^2) / 2; p_phi is the Clairaut
// invariant and is conserved exactly by the splitting integrator.

#include <optional>
#include <stdexcept>
#include <vector>

#include "zoll/damping.hpp"
#include "zoll/geometry.hpp"

namespace zoll {

struct PoleCrossing : std::runtime_error {
  explicit PoleCrossing(const std::string& m) : std::runtime_error(m) {}
};
struct IncompletePath : std::runtime_error {
  explicit IncompletePath(const std::string& m) : std::runtime_error(m) {}
};

struct GeodesicState {
  double ell = 0.0;
  double phi = 0.0;
  double p_ell = 0.0;
  double p_phi = 0.0;
};

struct GeodesicPath {
  double dt = 0.0;
  std::vector<GeodesicState> states;  // states[i] at time i*dt
  double duration() const { return dt * double(states.size() - 1); }
};

// distance in (ell, phi mod 2pi, p_ell, p_phi)
double state_distance(const GeodesicState& a, const GeodesicState& b);

// unit-speed defect |p_ell^2 + p_phi^2/r^2 - 1|
double speed_defect(const SurfaceProfile& profile, const GeodesicState& s);

GeodesicPath integrate_geodesic(const SurfaceProfile& profile,
                                const GeodesicState& initial, double t_max,
                                double dt);

// endpoint-only flow with conservation diagnostics and optional region timing
struct FlowResult {
  GeodesicState final_state;
  double clairaut_drift = 0.0;
  double energy_drift = 0.0;
  std::optional<double> first_entry;
};
// stop_at_entry: return as soon as the region is entered (entry time only)
FlowResult flow_geodesic(const SurfaceProfile& profile, const GeodesicState& initial,
                         double t_max, double dt,
                         const DampingSpec* region = nullptr,
                         bool stop_at_entry = false);

struct TurningData {
  double ell_min = 0.0;
  double ell_max = 0.0;
  int contacts_min = 0;  // contacts with the lower parallel per period
  int contacts_max = 0;
};
// extrema and contact counts over the first period (assumed 2pi, Zoll)
TurningData turning_parallels(const GeodesicPath& path);

std::optional<double> first_entry_time(const GeodesicPath& path,
                                       const DampingSpec& region,
                                       const SurfaceProfile& profile);

// first recurrence of the initial state within tolerance (refined to a local
// minimum of the state distance); nullopt if none found in the path
std::optional<double> detect_period(const GeodesicPath& path, double tol = 1e-2);

struct GccReport {
  double fraction_controlled = 0.0;
  double max_entry_time = 0.0;
  std::vector<int> exceptional_orbits;       // indices into `initials`
  std::vector<GeodesicState> initials;
  std::vector<std::optional<double>> entry_times;
};
GccReport check_gcc(const SurfaceProfile& profile, const DampingSpec& region,
                    int samples, double t_cap = 4.0 * 3.14159265358979324);

}  // namespace zoll
