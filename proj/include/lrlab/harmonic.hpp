#pragma once

#include <Eigen/Core>
#include <vector>

#include "lrlab/lattice.hpp"

namespace lrlab::harmonic {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// Coupled-oscillator system on the torus (-L, L]^d (L > 0) or on Z^d (L == 0,
// admitted only by the operations that quadrature over the Brillouin zone).
struct HarmonicSpec {
  int d = 1;
  long L = 0;
  double omega = 1.0;
  std::vector<double> lambda;

  bool finite() const { return L > 0; }
  long volume() const;                 // (2L)^d
  double c() const;                    // (omega^2 + 4 sum_j lambda_j)^{1/2}
  void validate() const;
};

// Finitely supported complex site function; rows of pts are coordinates
// (canonical torus representatives for finite specs), one value each.
struct SiteFunction {
  lattice::CoordMatrix pts;
  VectorXcd vals;

  long size() const { return vals.size(); }
  double l1() const { return vals.cwiseAbs().sum(); }
  double l2() const { return vals.norm(); }
};

SiteFunction site_function(const HarmonicSpec& spec, lattice::CoordMatrix pts,
                           VectorXcd vals);
SiteFunction delta(const HarmonicSpec& spec, const lattice::Coord& x, cd amp = 1.0);

// sqrt(omega^2 + 4 sum_j lambda_j sin^2(k_j / 2))
double dispersion(const HarmonicSpec& spec, const VectorXd& k);

// c * max(2/mu, e^{mu/2 + 1}): velocity certificate for decay rate mu.
double velocity(const HarmonicSpec& spec, double mu);

// The three propagation kernels at time t, indexed by the torus site set.
struct KernelTriple {
  lattice::SiteSet sites;
  VectorXd hm1, h0, hp1;
  double t = 0.0;
};

KernelTriple kernels_finite(const HarmonicSpec& spec, double t);

struct KernelPoint {
  double hm1 = 0.0, h0 = 0.0, hp1 = 0.0;
};

// Brillouin-zone quadrature values of the infinite-volume kernels at x.
KernelPoint kernels_infinite(const HarmonicSpec& spec, double t,
                             const lattice::Coord& x, double tol = 1e-9,
                             long budget = 10'000'000);

// Weyl-generator flow f -> T_t f as a kernel convolution; finite volume,
// dense output over the torus.
SiteFunction apply_Tt(const HarmonicSpec& spec, const SiteFunction& f, double t);

// Infinite-volume T_t f evaluated at the requested output points, each to the
// quadrature tolerance.
SiteFunction apply_Tt_infinite(const HarmonicSpec& spec, const SiteFunction& f,
                               double t, const lattice::CoordMatrix& out,
                               double tol = 1e-9);

// Independent verification path: evolve (Re f, Im f) by exponentiating the
// 2|Lambda| x 2|Lambda| classical flow of the quadratic Hamiltonian.
SiteFunction symplectic_oracle(const HarmonicSpec& spec, const SiteFunction& f,
                               double t);

// Classical phase-space derivative at t = 0 in the complex dictionary
// (d/dt T_t f at 0), for convention cross-checks.
SiteFunction flow_derivative(const HarmonicSpec& spec, const SiteFunction& f);

// Diagonalizing Bogoliubov maps: U linear, V f = B conj(f) antilinear.
struct BogoliubovPair {
  MatrixXcd U, B;
};

BogoliubovPair bogoliubov_pair(const HarmonicSpec& spec);

struct BogoliubovResiduals {
  double unit = 0.0;   // ||U*U - V*V - 1||
  double cross = 0.0;  // ||V*U - U*V||
};

BogoliubovResiduals bogoliubov_residuals(const HarmonicSpec& spec);

// Third route to T_t: (U+V) F^{-1} M_t F (U* - V*) through the Bogoliubov
// pair; dense output.
SiteFunction bogoliubov_Tt(const HarmonicSpec& spec, const SiteFunction& f,
                           double t);

VectorXcd dense_values(const HarmonicSpec& spec, const SiteFunction& f);

// sum_x conj(f(x)) g(x)
cd weyl_inner(const SiteFunction& f, const SiteFunction& g);

// Exact norm ||[tau_t(W(f)), W(g)]|| = 2 |sin(Im<T_t f, g>/2)|.
double weyl_commutator_norm(const HarmonicSpec& spec, const SiteFunction& f,
                            const SiteFunction& g, double t);

// Middle link of the proof chain: sum_y |T_t f(y)| |g(y)|.
double evolved_overlap(const HarmonicSpec& spec, const SiteFunction& f,
                       const SiteFunction& g, double t);

// C(mu) sum_{x,y} |f(x)||g(y)| e^{-mu(d(x,y) - v(mu)|t|)},
// C(mu) = 1 + c e^{mu/2} + 1/c.
double harmonic_bound(const HarmonicSpec& spec, const SiteFunction& f,
                      const SiteFunction& g, double t, double mu);

// sup_{s>=0} e^{-eps s}(1+s)^{d+1} in closed form.
double envelope_sup(int d, double eps);

// C(eps, mu) = (1 + c e^{(mu+eps)/2} + 1/c) * envelope_sup.
double corollary_constant(const HarmonicSpec& spec, double eps, double mu);

// C(eps,mu) e^{(mu+eps) v(mu+eps) |t|} sum |f||g| F_mu(d(x,y)); torus metric
// when finite, l1 metric on Z^d otherwise.
double corollary_bound(const HarmonicSpec& spec, const SiteFunction& f,
                       const SiteFunction& g, double t, double mu,
                       double eps = 0.5);

struct DecayReport {
  double max_excess = 0.0;
  bool pass = false;
  long worst_site = -1;
  int worst_kernel = 0;  // -1, 0, +1
};

// Pointwise exponential-envelope check of a kernel triple at rate mu.
DecayReport check_kernel_decay(const HarmonicSpec& spec, const KernelTriple& ker,
                               double mu, double tol = 1e-10);
DecayReport kernel_decay_check(const HarmonicSpec& spec, double t, double mu,
                               double tol = 1e-10);

// Vacuum expectation of a product of Weyl operators, folded through the Weyl
// relations: phase * e^{-||(U*-V*) sum f||^2 / 4}.
cd vacuum_weyl_expectation(const HarmonicSpec& spec,
                           const std::vector<SiteFunction>& fs);

}  // namespace lrlab::harmonic
