#include "zoll/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "zoll/par.hpp"

namespace zoll {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMeridianPphi = 1e-12;
constexpr double kRMin = 1e-6;

double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a;
}

// Yoshida 4th-order composition weights for the Strang splitting
constexpr double kW1 = 1.3512071919596578;   // 1/(2 - 2^{1/3})
constexpr double kW0 = -1.7024143839193155;  // -2^{1/3} * w1

// One splitting substep: half-kick, drift, half-kick of the reduced system.
// The kick Hamiltonian p_phi^2/(2 r^2) leaves ell fixed, so the phi advance
// under it is exact.
struct Stepper {
  const SurfaceProfile& prof;
  double p_phi;

  void kick(double& ell, double& phi, double& p_ell, double hdt) const {
    double th = prof.theta_from_ell(ell);
    double r = std::sin(th);
    double dr = std::cos(th) / (1.0 + prof.h(std::cos(th)));
    double r3 = r * r * r;
    p_ell += hdt * p_phi * p_phi * dr / r3;
    phi += hdt * p_phi / (r * r);
  }

  void leapfrog(double& ell, double& phi, double& p_ell, double dt) const {
    kick(ell, phi, p_ell, 0.5 * dt);
    ell += dt * p_ell;
    kick(ell, phi, p_ell, 0.5 * dt);
  }

  void step(double& ell, double& phi, double& p_ell, double dt) const {
    leapfrog(ell, phi, p_ell, kW1 * dt);
    leapfrog(ell, phi, p_ell, kW0 * dt);
    leapfrog(ell, phi, p_ell, kW1 * dt);
  }
};

bool is_meridian(const GeodesicState& s) { return std::abs(s.p_phi) <= kMeridianPphi; }

// Exact meridian orbit: unfold onto the doubled meridian circle of
// circumference 2pi; crossing a pole flips phi by pi.
GeodesicState meridian_at(const GeodesicState& init, double t) {
  double s0 = (init.p_ell >= 0) ? init.ell : 2.0 * kPi - init.ell;
  double s = wrap_2pi(s0 + t);
  bool branch0 = (s <= kPi);
  bool start0 = (init.p_ell >= 0);  // the starting branch keeps phi = init.phi
  GeodesicState out;
  out.p_phi = 0.0;
  out.ell = branch0 ? s : 2.0 * kPi - s;
  out.phi = (branch0 == start0) ? init.phi : wrap_2pi(init.phi + kPi);
  out.p_ell = branch0 ? 1.0 : -1.0;  // ds/dt = +1 in the unfolded variable
  return out;
}

double energy_of(const SurfaceProfile& prof, double ell, double p_ell, double p_phi) {
  double r = prof.r_at_ell(ell);
  return 0.5 * (p_ell * p_ell + p_phi * p_phi / (r * r));
}

}  // namespace

double state_distance(const GeodesicState& a, const GeodesicState& b) {
  double dphi = std::abs(wrap_2pi(a.phi) - wrap_2pi(b.phi));
  dphi = std::min(dphi, 2.0 * kPi - dphi);
  double d1 = a.ell - b.ell, d3 = a.p_ell - b.p_ell, d4 = a.p_phi - b.p_phi;
  return std::sqrt(d1 * d1 + dphi * dphi + d3 * d3 + d4 * d4);
}

double speed_defect(const SurfaceProfile& profile, const GeodesicState& s) {
  return std::abs(2.0 * energy_of(profile, s.ell, s.p_ell, s.p_phi) - 1.0);
}

GeodesicPath integrate_geodesic(const SurfaceProfile& profile,
                                const GeodesicState& initial, double t_max,
                                double dt) {
  if (speed_defect(profile, initial) > 1e-8)
    throw std::invalid_argument("integrate_geodesic: initial state not unit speed");
  if (dt > 1e-3 * t_max)
    throw std::invalid_argument("integrate_geodesic: dt > 1e-3 * t_max");

  int n_steps = int(std::ceil(t_max / dt - 1e-12));
  dt = t_max / n_steps;  // land exactly on t_max
  GeodesicPath path;
  path.dt = dt;
  path.states.reserve(std::size_t(n_steps) + 1);
  path.states.push_back(initial);

  if (is_meridian(initial)) {
    for (int i = 1; i <= n_steps; ++i)
      path.states.push_back(meridian_at(initial, i * dt));
    return path;
  }

  Stepper st{profile, initial.p_phi};
  double ell = initial.ell, phi = initial.phi, p_ell = initial.p_ell;
  for (int i = 1; i <= n_steps; ++i) {
    st.step(ell, phi, p_ell, dt);
    if (profile.r_at_ell(ell) < kRMin)
      throw PoleCrossing("integrate_geodesic: r below threshold with p_phi != 0");
    path.states.push_back({ell, wrap_2pi(phi), p_ell, initial.p_phi});
  }
  return path;
}

FlowResult flow_geodesic(const SurfaceProfile& profile, const GeodesicState& initial,
                         double t_max, double dt, const DampingSpec* region,
                         bool stop_at_entry) {
  FlowResult res;
  double ell0 = profile.ell0();
  double e0 = energy_of(profile, initial.ell, initial.p_ell, initial.p_phi);
  int n_steps = int(std::ceil(t_max / dt - 1e-12));
  dt = t_max / n_steps;

  auto check_entry = [&](double t, double ell) {
    if (region && !res.first_entry && region->positive_at_ell(ell, ell0))
      res.first_entry = t;
  };
  check_entry(0.0, initial.ell);

  if (is_meridian(initial)) {
    for (int i = 1; i <= n_steps && !res.first_entry; ++i) {
      GeodesicState s = meridian_at(initial, i * dt);
      check_entry(i * dt, s.ell);
    }
    res.final_state = meridian_at(initial, n_steps * dt);
    res.clairaut_drift = 0.0;
    res.energy_drift = 0.0;
    return res;
  }

  Stepper st{profile, initial.p_phi};
  double ell = initial.ell, phi = initial.phi, p_ell = initial.p_ell;
  double max_e_drift = 0.0;
  for (int i = 1; i <= n_steps; ++i) {
    st.step(ell, phi, p_ell, dt);
    if (profile.r_at_ell(ell) < kRMin)
      throw PoleCrossing("flow_geodesic: r below threshold with p_phi != 0");
    check_entry(i * dt, ell);
    if (stop_at_entry && res.first_entry) break;
    if ((i & 63) == 0)
      max_e_drift = std::max(
          max_e_drift, std::abs(energy_of(profile, ell, p_ell, initial.p_phi) - e0));
  }
  max_e_drift = std::max(
      max_e_drift, std::abs(energy_of(profile, ell, p_ell, initial.p_phi) - e0));
  res.final_state = {ell, wrap_2pi(phi), p_ell, initial.p_phi};
  res.clairaut_drift = 0.0;  // p_phi is untouched by the splitting
  res.energy_drift = max_e_drift;
  return res;
}

TurningData turning_parallels(const GeodesicPath& path) {
  if (path.duration() < 2.0 * kPi - 1e-9)
    throw IncompletePath("turning_parallels: path shorter than one period");
  std::size_t n_period =
      std::min(path.states.size() - 1, std::size_t(std::floor(2.0 * kPi / path.dt)));

  TurningData td;
  td.ell_min = td.ell_max = path.states[0].ell;
  for (std::size_t i = 0; i <= n_period; ++i) {
    td.ell_min = std::min(td.ell_min, path.states[i].ell);
    td.ell_max = std::max(td.ell_max, path.states[i].ell);
  }
  // sign changes of p_ell: - -> + marks a lower-parallel contact
  int prev = 0;
  for (std::size_t i = 0; i <= n_period; ++i) {
    double p = path.states[i].p_ell;
    int sgn = (p > 1e-12) ? 1 : (p < -1e-12 ? -1 : 0);
    if (sgn == 0) continue;
    if (prev == -1 && sgn == 1) ++td.contacts_min;
    if (prev == 1 && sgn == -1) ++td.contacts_max;
    prev = sgn;
  }
  return td;
}

std::optional<double> first_entry_time(const GeodesicPath& path,
                                       const DampingSpec& region,
                                       const SurfaceProfile& profile) {
  double ell0 = profile.ell0();
  for (std::size_t i = 0; i < path.states.size(); ++i)
    if (region.positive_at_ell(path.states[i].ell, ell0))
      return double(i) * path.dt;
  return std::nullopt;
}

std::optional<double> detect_period(const GeodesicPath& path, double tol) {
  const GeodesicState& s0 = path.states[0];
  // skip an initial escape window, then find the first near-recurrence and
  // refine to the local minimum of the distance
  std::size_t start = std::size_t(0.5 / path.dt) + 1;
  for (std::size_t i = start; i < path.states.size(); ++i) {
    if (state_distance(path.states[i], s0) < tol) {
      std::size_t best = i;
      double dbest = state_distance(path.states[i], s0);
      for (std::size_t j = i + 1;
           j < path.states.size() && j * path.dt < i * path.dt + 1.0; ++j) {
        double d = state_distance(path.states[j], s0);
        if (d < dbest) {
          dbest = d;
          best = j;
        }
      }
      return double(best) * path.dt;
    }
  }
  return std::nullopt;
}

GccReport check_gcc(const SurfaceProfile& profile, const DampingSpec& region,
                    int samples, double t_cap) {
  if (samples < 10) throw std::invalid_argument("check_gcc: samples < 10");

  GccReport rep;
  rep.initials.resize(samples);
  rep.entry_times.resize(samples);

  // sample 0: the equator orbit (the only candidate exceptional geodesic)
  rep.initials[0] = {profile.ell0(), 0.0, 0.0, 1.0};

  // deterministic strata over (starting latitude, direction)
  const int n_dir = 10;
  int n_lat = (samples - 2) / n_dir + 1;
  for (int j = 1; j < samples; ++j) {
    int a = (j - 1) % n_dir;
    int b = (j - 1) / n_dir;
    double psi = 2.0 * kPi * (a + 0.5) / n_dir;
    double u = (b + 0.5) / n_lat;
    double ell_s = 0.15 * kPi + 0.70 * kPi * u;
    double r = profile.r_at_ell(ell_s);
    rep.initials[j] = {ell_s, 0.0, std::cos(psi), r * std::sin(psi)};
  }

  const double dt = 2e-4;
  par::parallel_for(samples, [&](std::int64_t j) {
    FlowResult fr = flow_geodesic(profile, rep.initials[std::size_t(j)], t_cap, dt,
                                  &region, /*stop_at_entry=*/true);
    rep.entry_times[std::size_t(j)] = fr.first_entry;
  });

  int controlled = 0;
  for (int j = 0; j < samples; ++j) {
    if (rep.entry_times[j]) {
      ++controlled;
      rep.max_entry_time = std::max(rep.max_entry_time, *rep.entry_times[j]);
    } else {
      rep.exceptional_orbits.push_back(j);
    }
  }
  rep.fraction_controlled = double(controlled) / double(samples);
  return rep;
}

}  // namespace zoll
