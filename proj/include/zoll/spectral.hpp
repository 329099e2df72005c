#pragma once
// Separated radial eigenproblem and spectrum assembly.
//
// For angular number k != 0 the eigenfunction w solves
//     -w'' + k^2 w = lambda^2 rho^2 w   on [-X, X]
// with outgoing-decay (WKB Robin) conditions at the truncation boundary.
// Eigenvalues are located by a symmetric tridiagonal matrix stage and then
// polished by Numerov shooting with bisection on the matching determinant;
// a two-grid Richardson step removes the leading discretization error.
//
// k = 0 has no decay boundary conditions; it is solved in the original
// ell in [0, pi] coordinate, -(r w')' = lambda^2 r w, with regular
// (bounded-derivative) conditions at the poles.

#include <stdexcept>
#include <vector>

#include "zoll/geometry.hpp"

namespace zoll {

struct WindowOutsideExclusion : std::runtime_error {
  explicit WindowOutsideExclusion(const std::string& m) : std::runtime_error(m) {}
};
struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& m) : std::runtime_error(m) {}
};
struct MismatchedODE : std::runtime_error {
  explicit MismatchedODE(const std::string& m) : std::runtime_error(m) {}
};
struct Orphan : std::runtime_error {
  explicit Orphan(const std::string& m) : std::runtime_error(m) {}
};
struct ClusterOverlap : std::runtime_error {
  explicit ClusterOverlap(const std::string& m) : std::runtime_error(m) {}
};

struct RadialEigenfunction {
  int k = 0;
  double lambda2 = 0.0;
  std::vector<double> w;       // samples on the chart x-grid, normalized in rho^2 dx
  double norm_rho = 1.0;
  double residual = 0.0;       // discrete-equation defect of the reported solution
};

// eigenvalues and eigenfunctions with lambda^2 in (window_lo, window_hi)
std::vector<RadialEigenfunction> radial_solve(const IsothermalChart& chart, int k,
                                              double window_lo, double window_hi);

struct SpectralCluster {
  int n = 0;
  double h = 0.0;  // (n + 1/2)^{-1}
  std::vector<RadialEigenfunction> members;  // one per k >= 0
  double A_observed = 0.0;
  // the chart the members were computed on (shared across the spectrum)
  std::shared_ptr<const IsothermalChart> chart;
  double center() const { return (n + 0.5) * (n + 0.5); }
  // conjugate modes e^{-ik phi} counted for k > 0
  int multiplicity() const;
};

struct Spectrum {
  std::vector<SpectralCluster> clusters;
  // eigenvalues whose deviation from the nearest center exceeds A_config;
  // reported, never silently widened into a cluster
  std::vector<RadialEigenfunction> outliers;
  double A_config = 0.0;
};

// search_pad widens the search range beyond the cluster windows; eigenvalues
// found in the extra margin are classified as outliers
Spectrum assemble_spectrum(const IsothermalChart& chart, int n_max, double A_config,
                           double search_pad = 0.0);

struct AdmissibleSet {
  double epsilon = 0.0;
  std::vector<int> k_set;  // k >= 0 with |1 - h^2 k^2| <= epsilon
};
AdmissibleSet admissible_set(const SpectralCluster& cluster, double epsilon);

// max deviation of the (Numerov-consistent) discrete Wronskian from its mean,
// normalized by the magnitude of its terms
double wronskian_check(const IsothermalChart& chart, const RadialEigenfunction& w1,
                       const RadialEigenfunction& w2);

// scalar action of K = Laplacian + L on a cluster member: (n+1/2)^2 - lambda^2
double apply_K(const Spectrum& spectrum, const RadialEigenfunction& member);

// one-sided initial-value solution of the radial recurrence at (k, lambda2);
// used to exhibit independent solutions for Wronskian tests
RadialEigenfunction radial_ivp_solution(const IsothermalChart& chart, int k,
                                        double lambda2, bool from_left,
                                        bool growing);

}  // namespace zoll
