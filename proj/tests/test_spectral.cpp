/// Radial eigenproblem against the round-sphere closed forms: lambda^2 =
/// n(n+1), eigenfunctions built from sech/tanh, multiplicity 2n+1.
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "zoll/geometry.hpp"
#include "zoll/spectral.hpp"

using namespace zoll;
namespace {
constexpr double kPi = std::numbers::pi;

IsothermalChart sphere_chart(int n_points = 4097) {
  auto p = std::make_shared<SurfaceProfile>(
      validate_profile(std::vector<double>{}, 4097));
  return build_chart(p, 8.0, n_points);
}

double weighted_dot(const IsothermalChart& ch, const std::vector<double>& a,
                    const std::vector<double>& b) {
  double acc = 0.0;
  for (int i = 0; i < ch.n; ++i) {
    double w = (i == 0 || i == ch.n - 1) ? 0.5 : 1.0;
    acc += w * a[i] * b[i] * ch.rho[i] * ch.rho[i];
  }
  return acc * ch.dx;
}
}  // namespace

TEST_CASE("sphere k=1: lambda^2 = n(n+1) across the whole window") {
  auto ch = sphere_chart();
  auto evs = radial_solve(ch, 1, 1.0, 700.0);
  REQUIRE(evs.size() == 25);  // n = 1..25, 650 = 25*26 < 700 < 26*27
  for (std::size_t i = 0; i < evs.size(); ++i) {
    double n = double(i) + 1.0;
    double exact = n * (n + 1.0);
    CHECK(std::abs(evs[i].lambda2 - exact) < 1e-6 * exact);
    CHECK(evs[i].residual < 1e-8);
  }
}

TEST_CASE("sphere k=12: single eigenvalue 156 with w proportional to sech^12") {
  auto ch = sphere_chart();
  auto evs = radial_solve(ch, 12, 144.0, 200.0);
  // the window also contains 182 = 13*14, the next k=12 eigenvalue
  REQUIRE(evs.size() == 2);
  CHECK(std::abs(evs[0].lambda2 - 156.0) < 1e-6 * 156.0);
  CHECK(std::abs(evs[1].lambda2 - 182.0) < 1e-6 * 182.0);
  // compare against the normalized closed form
  std::vector<double> ref(ch.n);
  for (int i = 0; i < ch.n; ++i) ref[i] = std::pow(1.0 / std::cosh(ch.x[i]), 12);
  double nrm = std::sqrt(weighted_dot(ch, ref, ref));
  for (auto& v : ref) v /= nrm;
  double sup = 0.0;
  for (int i = 0; i < ch.n; ++i)
    sup = std::max(sup, std::abs(evs[0].w[i] - ref[i]));
  CHECK(sup < 1e-6);
}

TEST_CASE("exclusion: window below k^2 is empty, straddling window throws") {
  auto ch = sphere_chart(2049);
  CHECK(radial_solve(ch, 5, 10.0, 24.9).empty());
  CHECK_THROWS_AS(radial_solve(ch, 5, 10.0, 30.0), WindowOutsideExclusion);
  // no eigenvalue with lambda <= |k| is ever reported
  auto evs = radial_solve(ch, 4, 16.0, 100.0);
  for (const auto& e : evs) CHECK(e.lambda2 > 16.0);
  REQUIRE(evs.size() == 6);  // n = 4..9
  CHECK(std::abs(evs[0].lambda2 - 20.0) < 1e-5);
}

TEST_CASE("k=0: sphere eigenvalues n(n+1) including the constant mode") {
  auto ch = sphere_chart(2049);
  auto evs = radial_solve(ch, 0, -0.5, 45.0);
  REQUIRE(evs.size() == 7);  // n = 0..6, 42 = 6*7
  for (std::size_t i = 0; i < evs.size(); ++i) {
    double n = double(i);
    CHECK(std::abs(evs[i].lambda2 - n * (n + 1.0)) < 1e-6 * (1.0 + n * (n + 1.0)));
    CHECK(evs[i].residual < 1e-5);
  }
  // the constant mode: w = 1/sqrt(area of rho^2 dx) = 1/sqrt(2)
  for (int i = 0; i < ch.n; i += 200)
    CHECK(evs[0].w[i] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("eigenvalue symmetry in k") {
  auto ch = sphere_chart(2049);
  auto a = radial_solve(ch, 3, 9.5, 50.0);
  auto b = radial_solve(ch, -3, 9.5, 50.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].lambda2 == doctest::Approx(b[i].lambda2).epsilon(1e-14));
}

TEST_CASE("orthogonality: Gram matrix at fixed k is the identity") {
  auto ch = sphere_chart();
  auto evs = radial_solve(ch, 2, 4.0, 100.0);
  REQUIRE(evs.size() == 8);  // n = 2..9
  for (std::size_t i = 0; i < evs.size(); ++i)
    for (std::size_t j = i; j < evs.size(); ++j) {
      double g = weighted_dot(ch, evs[i].w, evs[j].w);
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-6);
    }
}

TEST_CASE("grid convergence on the sphere") {
  auto coarse = sphere_chart(1025);
  auto fine = sphere_chart(2049);
  auto ec = radial_solve(coarse, 2, 4.0, 50.0);
  auto ef = radial_solve(fine, 2, 4.0, 50.0);
  REQUIRE(ec.size() == ef.size());
  for (std::size_t i = 0; i < ec.size(); ++i) {
    double exact = (double(i) + 2.0) * (double(i) + 3.0);
    double errc = std::abs(ec[i].lambda2 - exact);
    double errf = std::abs(ef[i].lambda2 - exact);
    CHECK(errf <= std::max(errc, 1e-12));  // no degradation under refinement
    CHECK(errc < 1e-6 * exact);
  }
}

TEST_CASE("assemble_spectrum on the sphere: clusters, A_observed, counting") {
  auto ch = sphere_chart(2049);
  auto sp = assemble_spectrum(ch, 6, 0.3);
  REQUIRE(sp.clusters.size() == 7);
  CHECK(sp.outliers.empty());
  for (const auto& cl : sp.clusters) {
    CHECK(std::abs(cl.A_observed - 0.25) < 1e-6);
    CHECK(cl.multiplicity() == 2 * cl.n + 1);
    // exactly one member per k with |k| <= n
    REQUIRE(int(cl.members.size()) == cl.n + 1);
    for (int k = 0; k <= cl.n; ++k) CHECK(cl.members[k].k == k);
    for (const auto& m : cl.members)
      CHECK(std::abs(m.lambda2 - double(cl.n) * (cl.n + 1)) < 1e-5);
  }
}

TEST_CASE("assemble_spectrum argument validation") {
  auto ch = sphere_chart(2049);
  CHECK_THROWS_AS(assemble_spectrum(ch, 3, 1.5), ClusterOverlap);
  CHECK_THROWS_AS(assemble_spectrum(ch, 0, 0.3), std::invalid_argument);
}

TEST_CASE("admissible set selects k near h^{-1}") {
  auto ch = sphere_chart(2049);
  auto sp = assemble_spectrum(ch, 6, 0.3);
  const auto& cl = sp.clusters[6];  // h = 2/13
  auto as = admissible_set(cl, 0.2);
  // |1 - (2k/13)^2| <= 0.2 holds for k = 6 only among 0..6
  REQUIRE(as.k_set.size() == 1);
  CHECK(as.k_set[0] == 6);
  auto all = admissible_set(cl, 1.0);
  CHECK(all.k_set.size() == cl.members.size());
}

TEST_CASE("wronskian_check invariants") {
  auto ch = sphere_chart(2049);
  auto w1 = radial_ivp_solution(ch, 3, 12.0, /*from_left=*/true, /*growing=*/true);
  auto w2 = radial_ivp_solution(ch, 3, 12.0, /*from_left=*/false, /*growing=*/true);
  CHECK(wronskian_check(ch, w1, w1) == 0.0);
  CHECK(wronskian_check(ch, w1, w2) <= 1e-6);
  auto w3 = w1;
  for (auto& v : w3.w) v *= 3.7;
  CHECK(wronskian_check(ch, w1, w3) <= 1e-12);
  auto w4 = radial_ivp_solution(ch, 4, 12.0, true, true);
  CHECK_THROWS_AS(wronskian_check(ch, w1, w4), MismatchedODE);
}

TEST_CASE("apply_K: scalar action is center minus lambda^2") {
  auto ch = sphere_chart(2049);
  auto sp = assemble_spectrum(ch, 5, 0.3);
  for (const auto& cl : sp.clusters)
    for (const auto& m : cl.members) {
      double v = apply_K(sp, m);
      CHECK(std::abs(v - 0.25) < 1e-5);
      CHECK(std::abs(v) <= cl.A_observed + 1e-12);
    }
  // center-exact synthetic member maps to zero
  RadialEigenfunction synth;
  synth.k = 2;
  synth.lambda2 = 12.25;  // (3+1/2)^2
  CHECK(apply_K(sp, synth) == 0.0);
  synth.lambda2 = 1000.0;
  CHECK_THROWS_AS(apply_K(sp, synth), Orphan);
}

TEST_CASE("perturbed profile [0.1]: clusters stay within A_config = 1") {
  auto p = std::make_shared<SurfaceProfile>(
      validate_profile(std::vector<double>{0.1}, 4097));
  auto ch = build_chart(p, 8.0, 2049);
  auto sp = assemble_spectrum(ch, 5, 1.0);
  CHECK(sp.outliers.empty());
  for (const auto& cl : sp.clusters) {
    CHECK(cl.A_observed < 1.0);
    CHECK(cl.multiplicity() == 2 * cl.n + 1);
  }
}
