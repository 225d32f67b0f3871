#pragma once

#include <span>

#include "lrlab/harmonic.hpp"
#include "lrlab/lrbounds.hpp"
#include "lrlab/spectral.hpp"

namespace lrlab::thermolimit {

// Nested finite volumes sharing one interaction recipe; interactions[k] holds
// the recipe's terms with supports indexed into volumes[k].
struct VolumeFamily {
  std::vector<lattice::SiteSet> volumes;
  std::vector<std::vector<int>> dims;
  std::vector<lrbounds::Interaction> interactions;

  // Strict nesting by coordinates; identical terms on shared supports.
  void validate() const;
};

struct VolumeStep {
  long n = 0, m = 0;
  double delta = 0.0;  // sup over the t grid of ||tau^m_t(A) - embed(tau^n_t(A))||
  double tail = 0.0;   // proof envelope at t_max
  bool pass = false;
};

struct ConvergenceOptions {
  int grid = 64;           // initial number of t points on [0, t_max]
  int max_doublings = 2;   // grid refinement cap
  double grid_tol = 1e-9;  // stop refining when delta grows less than this
  double eps_num = 1e-8;
  quantum::LanczosOptions norm_opts{};
};

struct ConvergenceReport {
  std::vector<VolumeStep> steps;
  double t_max = 0.0;
  long grid_points = 0;      // largest grid used by any pair
  bool grid_converged = true;
  double phi_norm = 0.0;     // on the largest volume
  double conv_C = 0.0;       // exact convolution constant, largest volume
  bool decreasing = true;    // delta strictly decreasing along the sequence
  bool passed = false;       // every step's delta <= tail + eps_num
};

// Sup over a refining t grid of the operator-norm difference between the
// dynamics on consecutive volumes (the smaller evolution embedded into the
// larger region), against the convergence proof's tail
//   2 ||A|| ||Phi|| int_0^t (e^{2||Phi|| C |t-s|} - 1) ds
//     * sum_{y in m\n} sum_{x in supp A} F(d(x,y)).
// A's support is indexed into the smallest volume. ||Phi|| and C are taken on
// the largest volume, which dominates every smaller one.
ConvergenceReport volume_convergence(const VolumeFamily& fam,
                                     const quantum::LocalOperator& A,
                                     double t_max,
                                     const lattice::DecayFunction& F,
                                     const ConvergenceOptions& opts = {});

struct HarmonicStep {
  long L = 0;
  double diff = 0.0;    // l2 difference on the window |x| <= L/2
  double beyond = 0.0;  // max |T^L_t f| at torus distance > 3L/4 from supp f
  bool wraparound = false;
};

struct HarmonicConvergence {
  std::vector<HarmonicStep> steps;
  double t = 0.0;
  double floor = 0.0;
  bool decreasing = true;  // to the quadrature floor; see below
};

// Finite-torus propagation against Brillouin-zone quadrature on the growing
// window |x| <= L/2. Once the true image-sum error drops below the quadrature
// floor, consecutive diffs are pure evaluation noise, so the decreasing flag
// excuses steps whose diff is already under `floor`. The wraparound flag is a
// measured detector: torus amplitude far from the support exceeding wrap_tol.
HarmonicConvergence harmonic_volume_convergence(
    const harmonic::HarmonicSpec& base, std::span<const long> Ls,
    const harmonic::SiteFunction& f, double t, double quad_tol = 1e-12,
    double wrap_tol = 1e-9, double floor = 1e-10);

struct DysonReport {
  std::vector<double> term_norms;   // ||order-n term||, n = 1..n_max
  std::vector<double> remainders;   // ||exact - partial sum through n||, n = 0..n_max
  std::vector<double> tail_bounds;  // (2||V||t)^{n+1}/(n+1)! ||A|| e^{2||V||t}
  bool passed = false;
};

// Interaction-picture expansion of e^{it(H0+V)} A e^{-it(H0+V)} in iterated
// time-ordered commutator integrals of the free dynamics, evaluated by nested
// Gauss-Legendre over the simplex with order-adapted node counts, against the
// exact dense evolution.
DysonReport dyson_truncation(const quantum::SpectralModel& H0,
                             const quantum::LocalOperator& V,
                             const quantum::LocalOperator& A, double t,
                             int n_max, double eps_num = 1e-8);

}  // namespace lrlab::thermolimit
