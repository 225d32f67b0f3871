#pragma once

#include <span>

#include "lrlab/lattice.hpp"
#include "lrlab/spectral.hpp"

namespace lrlab::gapped {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Distance-ell partition of a site set around the two-sided surface of a
// distinguished region: interior sites of the region at distance >= ell from
// the surface, the mirror-image exterior, and the collar in between. The
// three parts are disjoint and cover every site.
struct RegionSplit {
  long ell = 0;
  std::vector<long> region;    // the distinguished subsystem
  std::vector<long> surface;   // sites with a nearest neighbour across the cut
  std::vector<long> interior;  // {x in region : d(x, surface) >= ell}
  std::vector<long> exterior;  // likewise outside the region
  std::vector<long> collar;    // {x : d(x, surface) < ell}
  bool interior_empty = false;
  bool exterior_empty = false;
};

RegionSplit region_split(const lattice::SiteSet& S, std::span<const long> region,
                         long ell);

// {x : d(x, split.surface) < radius}, sorted. Empty when the surface is.
std::vector<long> collar_sites(const lattice::SiteSet& S, const RegionSplit& split,
                               long radius);

// Hamiltonian term classes for a split: 0 = meets the interior, 1 = contained
// in the collar, 2 = meets the exterior. Throws if a term meets both interior
// and exterior (the collar is too thin for the interaction range); otherwise
// the classes partition the terms exactly, so the three class sums reproduce
// the Hamiltonian.
std::vector<int> classify_terms(const RegionSplit& split,
                                const std::vector<quantum::LocalOperator>& terms);

// Gaussian-smoothed three-term decomposition of H - E0. Each term class is
// recentred by its ground-state expectation and time-averaged under the
// dynamics of the restricted Hamiltonian of an enclosing region (the region
// itself, the 2 ell collar, the complement) with Gaussian weight of variance
// set by alpha = a v^2 / (2 ell).
struct SmoothedDecomposition {
  long ell = 0;
  double a = 0.0;
  double v = 0.0;
  double alpha = 0.0;
  quantum::LocalOperator K_A;     // interior class, support = region
  quantum::LocalOperator K_B;     // collar class, support = 2 ell collar
  quantum::LocalOperator K_rest;  // exterior class, support = complement
  double residual_sum = 0.0;      // ||(H - E0) - K_A - K_B - K_rest||
  Eigen::Vector3d residual_gs;    // ||K_X psi0|| for X = A, B, rest
  double epsilon_emp = 0.0;       // max entry of residual_gs
};

SmoothedDecomposition smoothed_terms(const quantum::SpectralModel& M,
                                     const lattice::SiteSet& S,
                                     const RegionSplit& split, double a, double v);

// Spectral projections of K_A and K_rest onto eigenvalues <= threshold, as
// matrices on their own factors, together with the quantities entering the
// product-projector estimate: the ground-state misses ||(1 - P) psi0||, their
// Markov majorants ||K psi0|| / threshold, and the product defect
// step2 = ||P0 (1 - P_A P_rest)|| with its budget 2 sqrt(epsilon_emp).
struct LowEnergyProjectors {
  double threshold = 0.0;
  MatrixXcd P_A;
  MatrixXcd P_rest;
  long rank_A = 0;
  long rank_rest = 0;
  double commute_A = 0.0;  // ||[P_A, K_A]||
  double commute_rest = 0.0;
  double miss_A = 0.0;
  double miss_rest = 0.0;
  double markov_A = 0.0;
  double markov_rest = 0.0;
  double step2 = 0.0;
  double step2_bound = 0.0;
};

LowEnergyProjectors low_energy_projectors(const quantum::SpectralModel& M,
                                          const SmoothedDecomposition& D,
                                          double threshold);

// Gaussian time average of e^{itH} relative to the ground energy, evaluated
// in the eigenbasis as the damping exp(-(E - E0)^2 / (4 alpha)). deviation is
// the distance to the ground projection; its excited-state part is checked
// against bound = exp(-gap^2 / (4 alpha)).
struct GroundFilter {
  quantum::LocalOperator op;
  double alpha = 0.0;
  double deviation = 0.0;
  double bound = 0.0;
};

GroundFilter p_alpha(const quantum::SpectralModel& M, double alpha,
                     double deg_tol = 1e-8);

struct QuadraturePlan {
  double tol = 1e-8;     // stop once a doubling changes the sum by less
  long first = 32;       // initial Gauss-Hermite node count
  long cap = 16384;      // resource error beyond this many nodes
};

// Gaussian time average of e^{it(K_A + K_B + K_rest)} e^{-it(K_A + K_rest)}
// by Gauss-Hermite quadrature over the eigenphases of the two generators,
// node count doubled until the accumulated sum settles, then conditionally
// expected onto the 3 ell collar (partial trace over the complement divided
// by its dimension, so the norm cannot grow).
struct BoundaryOperator {
  quantum::LocalOperator P_B;       // on the 3 ell collar
  long nodes = 0;                   // node count at convergence
  double quad_change = 0.0;         // last doubling increment, Frobenius
  double norm = 0.0;                // ||P_B||
  double idempotency_defect = 0.0;  // ||P_B^2 - P_B||, recorded only
  double final_residual = 0.0;      // ||P_B (P_A P_rest) - P0||
};

BoundaryOperator boundary_operator(const quantum::SpectralModel& M,
                                   const lattice::SiteSet& S,
                                   const RegionSplit& split,
                                   const SmoothedDecomposition& D,
                                   const LowEnergyProjectors& P,
                                   const QuadraturePlan& quad = {});

// One collar radius of the full approximation pipeline.
struct PipelineStage {
  RegionSplit split;
  SmoothedDecomposition smooth;
  LowEnergyProjectors projectors;
  GroundFilter filter;
  BoundaryOperator boundary;
};

struct PipelineOptions {
  double a = 0.0;                 // decay rate of the velocity certificate
  double v = 0.0;                 // propagation speed of the certificate
  double threshold_floor = 1e-8;  // lower clamp for sqrt(epsilon_emp)
  double deg_tol = 1e-8;
  QuadraturePlan quadrature;
};

// region_split -> smoothed_terms -> low_energy_projectors -> p_alpha ->
// boundary_operator for each collar radius, sharing the model's spectral
// data. Thresholds use the empirical sqrt(epsilon_emp) of each stage.
std::vector<PipelineStage> run_pipeline(const quantum::SpectralModel& M,
                                        const lattice::SiteSet& S,
                                        std::span<const long> region,
                                        std::span<const long> ells,
                                        const PipelineOptions& opts);

}  // namespace lrlab::gapped
