/// Wave solver checks: exact discrete conservation when undamped, the energy
/// identity at second order, decay fits, and the observer-ratio oracle 2*pi
/// for a uniformly observed time-harmonic mode.
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "zoll/geometry.hpp"
#include "zoll/spectral.hpp"
#include "zoll/wavesim.hpp"

using namespace zoll;
namespace {
constexpr double kPi = std::numbers::pi;

IsothermalChart sphere_chart(int n_points = 2049) {
  auto p = std::make_shared<SurfaceProfile>(
      validate_profile(std::vector<double>{}, 4097));
  return build_chart(p, 8.0, n_points);
}

RadialEigenfunction single_mode(const IsothermalChart& ch, int n, int k) {
  double c = (n + 0.5) * (n + 0.5);
  auto evs = radial_solve(ch, k, c - 1.0, c + 1.0);
  REQUIRE(evs.size() == 1);
  return evs.front();
}
}  // namespace

TEST_CASE("undamped evolution conserves the discrete energy") {
  auto ch = sphere_chart();
  auto st = state_from_mode(ch, single_mode(ch, 5, 3));
  DampingSpec none;
  auto tr = evolve(ch, st, none, 20.0, 5e-3);
  for (double e : tr.energy)
    CHECK(std::abs(e - tr.energy[0]) < 1e-6 * tr.energy[0]);
  CHECK(energy_identity_residual(tr) < 1e-9);  // roundoff accumulation only
  CHECK(std::abs(tr.fitted_beta) < 1e-8);  // no decay
  // a truly flat trace degenerates the fit
  EnergyTrace flat;
  for (int i = 0; i <= 100; ++i) {
    flat.times.push_back(0.1 * i);
    flat.energy.push_back(2.5);
    flat.dissipation.push_back(0.0);
  }
  CHECK_THROWS_AS(fit_decay(flat, 0.0, 10.0), DegenerateFit);
}

TEST_CASE("k = 0 block: conservation on the ell grid") {
  auto ch = sphere_chart();
  auto st = state_from_mode(ch, single_mode(ch, 3, 0));
  DampingSpec none;
  auto tr = evolve(ch, st, none, 10.0, 5e-3);
  for (double e : tr.energy)
    CHECK(std::abs(e - tr.energy[0]) < 1e-6 * tr.energy[0]);
}

TEST_CASE("spectral consistency: evolved mode oscillates at its lambda") {
  auto ch = sphere_chart();
  auto m = single_mode(ch, 5, 3);
  auto st = state_from_mode(ch, m);  // u = w, v = 0
  DampingSpec uniform = DampingSpec::parse("uniform");
  double dt = 1e-3;
  auto tr = evolve_observed(ch, st, uniform, 1.2, dt);
  // observer rate is ||v||^2 = 2 K(t) proportional to sin^2(lambda t); its
  // first zero after t = 0 sits at t = pi/lambda
  std::size_t jmin = 0;
  double best = 1e300;
  for (std::size_t j = 1; j + 1 < tr.times.size(); ++j) {
    double inc = tr.dissipation[j + 1] - tr.dissipation[j];
    if (tr.times[j] > 0.3 && inc < best) {
      best = inc;
      jmin = j;
    }
    if (tr.times[j] > 0.9) break;
  }
  // parabolic refinement of the increment minimum
  auto inc = [&](std::size_t j) { return tr.dissipation[j + 1] - tr.dissipation[j]; };
  double d1 = inc(jmin - 1), d2 = inc(jmin), d3 = inc(jmin + 1);
  double shift = 0.5 * (d1 - d3) / (d1 - 2.0 * d2 + d3);
  double t_zero = tr.times[jmin] + 0.5 * dt + shift * dt;
  double lambda_est = kPi / t_zero;
  CHECK(std::abs(lambda_est - std::sqrt(m.lambda2)) < 1e-4 * lambda_est);
}

TEST_CASE("indicator damping on the equatorial mode decays monotonically") {
  auto ch = sphere_chart();
  auto st = state_from_mode(ch, single_mode(ch, 20, 20));
  auto tr = evolve(ch, st, DampingSpec::parse("indicator_upper"), 20.0, 5e-3);
  for (std::size_t j = 0; j + 1 < tr.energy.size(); ++j)
    CHECK(tr.energy[j + 1] <= tr.energy[j] * (1.0 + 1e-12));
  CHECK(tr.fitted_beta > 0.0);
  CHECK(tr.energy.back() < 0.9 * tr.energy.front());
}

TEST_CASE("energy identity: residual small and second order in dt") {
  auto ch = sphere_chart();
  auto st = state_from_mode(ch, single_mode(ch, 1, 1));
  auto damp = DampingSpec::parse("indicator_upper");
  auto tr1 = evolve(ch, st, damp, 5.0, 1e-3);
  auto tr2 = evolve(ch, st, damp, 5.0, 5e-4);
  double r1 = energy_identity_residual(tr1);
  double r2 = energy_identity_residual(tr2);
  CHECK(r1 < 1e-6);
  CHECK(r1 / r2 > 3.5);
  CHECK(r1 / r2 < 4.5);
}

TEST_CASE("fully damped run approaches equilibrium with a clean identity") {
  auto ch = sphere_chart(1025);
  auto st = state_from_mode(ch, single_mode(ch, 2, 1));
  // dt chosen so the O(dt^2 lambda^2) dissipation quadrature error stays
  // below 1e-6 over the full decay
  auto tr = evolve(ch, st, DampingSpec::parse("uniform"), 15.0, 5e-4);
  CHECK(tr.energy.back() < 1e-4 * tr.energy.front());
  CHECK(energy_identity_residual(tr) < 1e-6);
}

TEST_CASE("fit_decay on synthetic exponential data") {
  EnergyTrace tr;
  for (int i = 0; i <= 1000; ++i) {
    double t = i * 0.01;
    tr.times.push_back(t);
    tr.energy.push_back(3.0 * std::exp(-0.7 * t));
    tr.dissipation.push_back(0.0);
  }
  auto f = fit_decay(tr, 0.0, 10.0);
  CHECK(f.beta == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(f.C == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("uniform observer ratio is 2*pi for a time-harmonic mode") {
  auto ch = sphere_chart();
  auto m = single_mode(ch, 20, 20);
  auto st = state_from_mode(ch, m);
  auto tr = evolve_observed(ch, st, DampingSpec::parse("uniform"), 2.0 * kPi, 2e-3);
  double ratio = tr.dissipation.back() / tr.energy[0];
  // exact value 2*pi - sin(4*pi*lambda)/(2*lambda); the correction is < 0.03
  CHECK(std::abs(ratio - 2.0 * kPi) < 0.05);
}

TEST_CASE("observability_experiment: zero observer and argument checks") {
  auto ch = sphere_chart(1025);
  auto sp = assemble_spectrum(ch, 3, 0.3);
  DampingSpec none;
  auto rep = observability_experiment(ch, none, 8, 2.0, sp, 42);
  CHECK(rep.worst_ratio == 0.0);
  auto rep2 =
      observability_experiment(ch, DampingSpec::parse("indicator_upper"), 8,
                               2.0 * kPi, sp, 42);
  CHECK(rep2.worst_ratio > 0.1);  // half-surface observer sees every mode
  CHECK(rep2.per_sample.size() == 8);
  CHECK_THROWS_AS(observability_experiment(ch, none, 4, 2.0, sp, 1),
                  std::invalid_argument);
}

TEST_CASE("CFL guard") {
  auto ch = sphere_chart(1025);
  auto st = state_from_mode(ch, single_mode(ch, 20, 20));
  DampingSpec none;
  CHECK_THROWS_AS(evolve(ch, st, none, 1.0, 0.05), CFLViolation);
}

TEST_CASE("smooth vanishing damping is weaker than the indicator") {
  auto ch = sphere_chart();
  auto st = state_from_mode(ch, single_mode(ch, 10, 10));
  auto t_ind = evolve(ch, st, DampingSpec::parse("indicator_upper"), 20.0, 5e-3);
  auto t_sm = evolve(ch, st, DampingSpec::parse("smooth_vanishing(2)"), 20.0, 5e-3);
  CHECK(t_ind.fitted_beta > 0.0);
  CHECK(t_sm.fitted_beta > 0.0);
  CHECK(t_sm.fitted_beta < t_ind.fitted_beta);
}
