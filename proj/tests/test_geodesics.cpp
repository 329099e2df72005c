/// Geodesic flow checks. Oracles: great circles on the round sphere (closure
/// at t = 2pi, turning parallels from spherical trigonometry) and the exact
/// Clairaut conservation law. The perturbed profile exercises the Zoll
/// closure property, which the integrator verifies rather than assumes.
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "zoll/geodesics.hpp"

using namespace zoll;
namespace {
constexpr double kPi = std::numbers::pi;

GeodesicState inclined_start(const SurfaceProfile& p, double psi, double ell_s) {
  double r = p.r_at_ell(ell_s);
  return {ell_s, 0.0, std::cos(psi), r * std::sin(psi)};
}
}  // namespace

TEST_CASE("equator stays put") {
  auto p = validate_profile(std::vector<double>{0.1}, 2049);
  GeodesicState eq{p.ell0(), 0.0, 0.0, 1.0};
  auto path = integrate_geodesic(p, eq, 2.0 * kPi, 1e-3);
  for (const auto& s : path.states) {
    CHECK(std::abs(s.ell - p.ell0()) < 1e-10);
    CHECK(s.p_phi == 1.0);
  }
  // phi advances at unit rate on the equator (r = 1); compare mod 2pi
  double dphi = std::abs(path.states.back().phi - std::fmod(path.duration(), 2 * kPi));
  CHECK(std::min(dphi, 2 * kPi - dphi) < 1e-6);
}

TEST_CASE("sphere great circle closes at 2pi") {
  auto p = validate_profile(std::vector<double>{}, 2049);
  for (double psi : {0.3, 1.2, 2.5}) {
    GeodesicState s0 = inclined_start(p, psi, 1.1);
    FlowResult fr = flow_geodesic(p, s0, 2.0 * kPi, 2e-4);
    CHECK(state_distance(fr.final_state, s0) < 1e-6);
    CHECK(fr.energy_drift < 1e-8);
    CHECK(fr.clairaut_drift == 0.0);
  }
}

TEST_CASE("meridian orbit is exact and crosses poles") {
  auto p = validate_profile(std::vector<double>{}, 2049);
  GeodesicState s0{1.0, 0.5, 1.0, 0.0};
  auto path = integrate_geodesic(p, s0, 2.0 * kPi, 1e-3);
  CHECK(state_distance(path.states.back(), s0) < 1e-9);
  // halfway around it sits on the opposite meridian
  auto mid = path.states[path.states.size() / 2];
  double dphi = std::abs(mid.phi - (s0.phi + kPi));
  CHECK(std::min(dphi, 2 * kPi - dphi) < 1e-9);

  GeodesicState s1{2.0, 0.5, -1.0, 0.0};
  auto path2 = integrate_geodesic(p, s1, 2.0 * kPi, 1e-3);
  CHECK(state_distance(path2.states.back(), s1) < 1e-9);
  CHECK(path2.states[1].ell > s1.ell - 1.1e-3);
  CHECK(path2.states[1].ell < s1.ell);
}

TEST_CASE("sphere turning parallels match spherical trigonometry") {
  auto p = validate_profile(std::vector<double>{}, 2049);
  // inclination i great circle: ell in [pi/2 - i, pi/2 + i], p_phi = cos i
  double inc = 0.6;
  GeodesicState s0{p.ell0(), 0.0, std::sin(inc), std::cos(inc)};
  auto path = integrate_geodesic(p, s0, 2.0 * kPi + 0.01, 2e-4);
  auto td = turning_parallels(path);
  CHECK(std::abs(td.ell_min - (kPi / 2 - inc)) < 1e-5);
  CHECK(std::abs(td.ell_max - (kPi / 2 + inc)) < 1e-5);
  CHECK(td.contacts_min == 1);
  CHECK(td.contacts_max == 1);
}

TEST_CASE("turning parallels on the perturbed profile") {
  auto p = validate_profile(std::vector<double>{0.1}, 2049);
  GeodesicState s0 = inclined_start(p, 0.9, p.ell0());
  auto path = integrate_geodesic(p, s0, 2.0 * kPi + 0.01, 2e-4);
  auto td = turning_parallels(path);
  CHECK(td.ell_min < p.ell0());
  CHECK(td.ell_max > p.ell0());
  CHECK(td.contacts_min == 1);
  CHECK(td.contacts_max == 1);
  CHECK_THROWS_AS(turning_parallels(integrate_geodesic(p, s0, 3.0, 1e-3)),
                  IncompletePath);
}

TEST_CASE("Zoll closure on the perturbed profile") {
  auto p = validate_profile(std::vector<double>{0.1}, 2049);
  for (double psi : {0.4, 1.0, 2.2, 4.0}) {
    GeodesicState s0 = inclined_start(p, psi, 1.3);
    FlowResult fr = flow_geodesic(p, s0, 2.0 * kPi, 2e-4);
    CHECK(state_distance(fr.final_state, s0) < 1e-4);
    CHECK(fr.energy_drift < 1e-8);
  }
}

TEST_CASE("period detection finds 2pi") {
  auto p = validate_profile(std::vector<double>{0.1}, 2049);
  GeodesicState s0 = inclined_start(p, 0.7, 1.2);
  auto path = integrate_geodesic(p, s0, 2.5 * kPi, 5e-4);
  auto T = detect_period(path);
  REQUIRE(T.has_value());
  CHECK(std::abs(*T - 2 * kPi) < 1e-2);
}

TEST_CASE("first entry times") {
  auto p = validate_profile(std::vector<double>{}, 2049);
  DampingSpec upper;
  upper.kind = DampingKind::IndicatorUpper;

  GeodesicState eq{p.ell0(), 0.0, 0.0, 1.0};
  auto eq_path = integrate_geodesic(p, eq, 2.0 * kPi, 1e-3);
  CHECK_FALSE(first_entry_time(eq_path, upper, p).has_value());

  // polar great circle from the south pole region: crosses the equator within
  // half a period
  GeodesicState pol{0.3, 0.0, 1.0, 0.0};
  auto pol_path = integrate_geodesic(p, pol, 2.0 * kPi, 1e-3);
  auto t = first_entry_time(pol_path, upper, p);
  REQUIRE(t.has_value());
  CHECK(*t <= kPi + 1e-3);
}

TEST_CASE("check_gcc: equator is the only exceptional orbit") {
  auto p = validate_profile(std::vector<double>{0.1}, 2049);
  DampingSpec upper;
  upper.kind = DampingKind::IndicatorUpper;
  auto rep = check_gcc(p, upper, 40, 4 * kPi);
  REQUIRE(rep.exceptional_orbits.size() == 1);
  CHECK(rep.exceptional_orbits[0] == 0);
  CHECK(rep.fraction_controlled == doctest::Approx(39.0 / 40.0));
  CHECK(rep.max_entry_time <= 2 * kPi + 1e-2);

  DampingSpec band;
  band.kind = DampingKind::HalfNeighborhood;
  band.delta = 1.0;
  band.width = 0.3;
  auto rep2 = check_gcc(p, band, 40, 4 * kPi);
  REQUIRE(rep2.exceptional_orbits.size() == 1);
  CHECK(rep2.exceptional_orbits[0] == 0);
}

TEST_CASE("check_gcc: uniform damping controls everything instantly") {
  auto p = validate_profile(std::vector<double>{}, 2049);
  DampingSpec all;
  all.kind = DampingKind::Uniform;
  auto rep = check_gcc(p, all, 12, 4 * kPi);
  CHECK(rep.fraction_controlled == 1.0);
  CHECK(rep.max_entry_time == 0.0);
}

TEST_CASE("unit speed precondition enforced") {
  auto p = validate_profile(std::vector<double>{}, 2049);
  GeodesicState bad{1.0, 0.0, 1.0, 0.5};
  CHECK_THROWS_AS(integrate_geodesic(p, bad, 1.0, 1e-4), std::invalid_argument);
}
