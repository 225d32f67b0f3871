#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "lrlab/common.hpp"

namespace lrlab::lattice {

enum class MetricKind { zd, torus };

using CoordMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;
using Coord = Eigen::Matrix<long, 1, Eigen::Dynamic>;

// Finite set of integer lattice sites. For kind == torus the coordinates live
// in (-L, L]^dim and distances wrap with period 2L; for kind == zd the plain
// l1 metric is used.
struct SiteSet {
  int dim = 1;
  MetricKind kind = MetricKind::zd;
  long L = 0;
  CoordMatrix sites;  // one row per site

  long size() const { return sites.rows(); }
  Coord site(long i) const { return sites.row(i); }
  // Index of a coordinate (torus kind wraps it first); -1 if absent.
  long index_of(const Coord& c) const;
};

SiteSet torus(int dim, long L);
// 1-d path {first, first+1, ..., first+n-1} with the Z metric.
SiteSet path(long n, long first = 0);
// Box [lo, hi]^dim with the Z^d metric.
SiteSet box(int dim, long lo, long hi);

// Canonical representative of v in (-L, L] (period 2L).
long torus_wrap(long v, long L);
// Componentwise canonical representative of site(y) - site(x).
Coord displacement(const SiteSet& S, long x, long y);

// min_eta |x - y + 2L eta|_1 on the torus; |x - y|_1 for the zd kind.
long torus_distance(const SiteSet& S, long x, long y);
long set_distance(const SiteSet& S, std::span<const long> X, std::span<const long> Y);

// Reproducing decay function (1+r)^-(dim+1), optionally weighted by e^{-mu r}.
struct DecayFunction {
  int dim = 1;
  double mu = 0.0;

  double operator()(double r) const;
};

double decay_value(const DecayFunction& F, double r);

// max over (x, y) of sum_z F(d(x,z)) F(d(z,y)) / F(d(x,y)); the smallest
// constant that works in the reproducing inequality on S. The triple loop is
// guarded by a work budget (element count).
double convolution_constant_exact(const SiteSet& S, const DecayFunction& F,
                                  double budget = 1e9);

// max over x of sum_y F(d(x,y)).
double uniform_integral(const SiteSet& S, const DecayFunction& F);

// 2^(dim+1) * sum_x (1+|x|_1)^-(dim+1): the standard closed-form upper bound
// for the convolution constant of the power-law decay function, valid for any
// mu >= 0. Site-set overload sums over S; the dim overload evaluates the full
// Z^d series (zeta closed form, dim <= 6).
double convolution_bound_power(const SiteSet& S);
double convolution_bound_power(int dim);

}  // namespace lrlab::lattice
