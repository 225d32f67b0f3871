#pragma once

#include <map>
#include <string>

#include "lrlab/lattice.hpp"
#include "lrlab/spectral.hpp"

namespace lrlab::lrbounds {

// Interaction: one Hermitian term per finite site subset (duplicate supports
// are summed).
struct Interaction {
  std::vector<quantum::LocalOperator> terms;
};

// support -> ||Phi(X)|| with duplicate supports merged first.
std::map<std::vector<long>, double> term_norms(const Interaction& Phi);

// max over site pairs (x, y) of sum_{X containing both} ||Phi(X)|| / F(d(x,y)).
double interaction_norm(const lattice::SiteSet& S, const Interaction& Phi,
                        const lattice::DecayFunction& F);

// Sites of X touched by an interaction term that crosses the boundary of X.
std::vector<long> phi_boundary(const lattice::SiteSet& S, const Interaction& Phi,
                               std::span<const long> X);

// min( sum_{x in boundary(X), y in Y} F(d(x,y)),
//      sum_{x in X, y in boundary(Y)} F(d(x,y)) ).
double d_factor(const lattice::SiteSet& S, const Interaction& Phi,
                const lattice::DecayFunction& F, std::span<const long> X,
                std::span<const long> Y);

struct BoundConstants {
  double conv_C = 0.0;   // exact convolution constant of F on S
  double phi_norm = 0.0; // interaction norm w.r.t. F
};

BoundConstants bound_constants(const lattice::SiteSet& S, const Interaction& Phi,
                               const lattice::DecayFunction& F,
                               double conv_budget = 1e9);

// (2 |A||B| / C) (e^{2 C ||Phi|| |t|} - 1) * D(X,Y)
double lr_bound(const BoundConstants& c, double d_factor_xy, double t,
                double norm_a, double norm_b);

// 2 ||Phi||_mu C_mu / mu
double lr_velocity(const BoundConstants& c_mu, double mu);

// Constants for the exponential-envelope form of the bound.
struct ExpBoundConstants {
  double mu = 0.0;
  BoundConstants weighted;  // constants for the e^{-mu r} weighted F
  double uniform_F = 0.0;   // max_y sum_x F(d(x,y)) for the unweighted F
  double velocity = 0.0;
};

ExpBoundConstants exp_bound_constants(const lattice::SiteSet& S,
                                      const Interaction& Phi, int dim, double mu,
                                      double conv_budget = 1e9);

// (2 |A||B| / C_mu) * uniform_F * min(|bX|, |bY|) * e^{-mu (d(X,Y) - v |t|)}
double exp_bound(const ExpBoundConstants& c, double dist_xy, long boundary_x,
                 long boundary_y, double t, double norm_a, double norm_b);

// Iterated-surface series coefficient a_n: sum over chains Z_1,...,Z_n of
// interaction supports, Z_1 crossing X, each Z_{i+1} crossing Z_i, with the
// last set required to meet Y; summand is the product of term norms.
double series_coefficient(const lattice::SiteSet& S, const Interaction& Phi,
                          std::span<const long> X, std::span<const long> Y, int n,
                          long budget = 10'000'000);

// Right-hand side of the closed-form estimate dominating a_n.
double series_coefficient_bound(const lattice::SiteSet& S, const Interaction& Phi,
                                const lattice::DecayFunction& F,
                                std::span<const long> X, std::span<const long> Y,
                                int n, double conv_budget = 1e9);

struct BoundRow {
  double t = 0.0;
  std::string pair;  // which bound form / observable pair the row refers to
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - measured
  bool pass = false;
};

struct BoundReport {
  std::vector<BoundRow> rows;
  double max_violation = 0.0;  // max(measured - bound) over rows, >= 0 part
  double min_margin = 0.0;
  long n_points = 0;
  bool passed = false;
  double eps_num = 1e-8;
  double conv_C = 0.0, phi_norm = 0.0;
  std::map<std::string, double> velocities;  // per exponential-form mu
};

// Measure ||[tau_t(A), B]|| against both bound forms on a time grid.
BoundReport verify_lr(const lattice::SiteSet& S, const std::vector<int>& dims,
                      const Interaction& Phi, const lattice::DecayFunction& F,
                      const quantum::LocalOperator& A,
                      const quantum::LocalOperator& B,
                      const std::vector<double>& t_grid,
                      const std::vector<double>& mus, double eps_num = 1e-8);

}  // namespace lrlab::lrbounds
